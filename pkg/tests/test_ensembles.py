"""Ensembles with exact multiplicities and the projector algebra over them."""
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from branchflow.classical import (
    BitWord,
    StepPermutation,
    cnot,
    compose_step,
    not_,
    program,
    toffoli,
)
from branchflow.ensembles import (
    Ensemble,
    basis_projector,
    branches,
    enumber_product,
    evolve_enumber,
    evolve_multiplicities,
    lift_function,
    mu_enumber,
    reconstruct_projectors_from_algebra,
    retime,
    scalar_product,
    state_enumber,
    tensor,
    unit_enumber,
    zero_enumber,
)
from branchflow.errors import TimeTagError, ValidationError

FOUR_GROUPS = {0b000: 4, 0b001: 2, 0b010: 1, 0b011: 5}


def toffoli_step(width=3):
    return compose_step((toffoli(1, 2, 3),), width)


class TestEnsemble:
    def test_total_counts_all_computers(self):
        e = Ensemble.from_mapping(3, FOUR_GROUPS)
        assert e.total == 12
        assert e.support() == (0, 1, 2, 3)

    def test_zero_multiplicities_dropped(self):
        e = Ensemble.from_mapping(2, {0: 3, 1: 0})
        assert e.support() == (0,)

    def test_negative_multiplicity_rejected(self):
        with pytest.raises(ValidationError):
            Ensemble.from_mapping(2, {0: -1})

    def test_proportions_are_exact(self):
        e = Ensemble.from_mapping(3, FOUR_GROUPS)
        assert e.proportions()[0b011] == Fraction(5, 12)

    def test_float_multiplicities_become_exact(self):
        e = Ensemble.from_mapping(1, {0: 0.5, 1: 0.25})
        assert e.multiplicity(0) == Fraction(1, 2)
        assert e.multiplicity(1) == Fraction(1, 4)


class TestEvolution:
    def test_step_moves_multiplicity_along_permutation(self):
        e = Ensemble.from_mapping(3, {0b011: 7})
        out = evolve_multiplicities(e, toffoli_step())
        assert out.multiplicity(0b111) == 7
        assert out.multiplicity(0b011) == 0

    def test_total_is_conserved(self):
        e = Ensemble.from_mapping(3, FOUR_GROUPS)
        out = evolve_multiplicities(e, toffoli_step())
        assert out.total == e.total

    def test_untouched_groups_keep_their_count(self):
        e = Ensemble.from_mapping(3, FOUR_GROUPS)
        out = evolve_multiplicities(e, toffoli_step())
        # Only 0b011 meets the gate's firing condition among the support.
        assert out.multiplicity(0b000) == 4
        assert out.multiplicity(0b111) == 5

    @given(st.randoms(use_true_random=False))
    @settings(max_examples=30)
    def test_branch_count_never_changes(self, rnd):
        mults = {w: rnd.randint(1, 9) for w in rnd.sample(range(32), 6)}
        e = Ensemble.from_mapping(5, mults)
        for _ in range(4):
            bits = rnd.sample(range(1, 6), 5)
            step = compose_step((toffoli(*bits[:3]), cnot(*bits[3:])), 5)
            e = evolve_multiplicities(e, step)
        assert len(e.support()) == 6
        assert sorted(m for _, m in e.items) == sorted(mults.values())


class TestBranches:
    def test_homogeneous_ensemble_is_one_branch(self):
        e = Ensemble.from_mapping(3, {0b011: 12})
        prog = program(3, (toffoli(1, 2, 3),))
        out = branches(e, prog)
        assert len(out) == 1
        assert out[0].multiplicity == 12

    def test_four_group_run_keeps_four_branches(self):
        e = Ensemble.from_mapping(3, FOUR_GROUPS)
        prog = program(3, (toffoli(1, 2, 3),), (cnot(1, 2),))
        out = branches(e, prog)
        assert [b.multiplicity for b in out] == [4, 2, 1, 5]
        assert all(len(b.trajectory) == 3 for b in out)

    def test_branches_agree_with_multiplicity_evolution(self):
        e = Ensemble.from_mapping(3, FOUR_GROUPS)
        prog = program(3, (toffoli(1, 2, 3),), (not_(2),))
        out = branches(e, prog)
        evolved = e
        for step in (compose_step(s, 3) for s in prog.steps):
            evolved = evolve_multiplicities(evolved, step)
        for b in out:
            assert evolved.multiplicity(b.trajectory[-1].value) == b.multiplicity

    def test_deleting_a_branch_leaves_the_rest_unchanged(self):
        prog = program(3, (toffoli(1, 2, 3),))
        full = branches(Ensemble.from_mapping(3, FOUR_GROUPS), prog)
        reduced = dict(FOUR_GROUPS)
        del reduced[0b001]
        partial = branches(Ensemble.from_mapping(3, reduced), prog)
        survivors = [b for b in full if b.start.value != 0b001]
        assert partial == survivors


class TestProjectorAlgebra:
    def test_basis_projector_coefficients(self):
        p0 = basis_projector(1, 0)
        assert p0.coeffs == (Fraction(1), Fraction(0))

    def test_projectors_resolve_the_unit(self):
        total = zero_enumber(2)
        for b in range(4):
            total = total + basis_projector(2, b)
        assert total == unit_enumber(2)

    def test_orthogonality_and_idempotence(self):
        for a in range(4):
            for b in range(4):
                prod = enumber_product(basis_projector(2, a), basis_projector(2, b))
                expected = basis_projector(2, a) if a == b else zero_enumber(2)
                assert prod == expected

    def test_scalar_product_is_kronecker_on_projectors(self):
        for a in range(4):
            for b in range(4):
                val = scalar_product(basis_projector(2, a), basis_projector(2, b))
                assert val == (1 if a == b else 0)

    def test_mu_against_projector_reads_multiplicity(self):
        e = Ensemble.from_mapping(3, FOUR_GROUPS)
        mu = mu_enumber(e)
        for b in range(8):
            assert scalar_product(mu, basis_projector(3, b)) == e.multiplicity(b)
        assert scalar_product(mu, unit_enumber(3)) == 12

    def test_mixed_time_tags_rejected(self):
        with pytest.raises(TimeTagError):
            scalar_product(basis_projector(2, 0, 0), basis_projector(2, 0, 1))
        with pytest.raises(TimeTagError):
            basis_projector(2, 0, 0) + basis_projector(2, 0, 1)
        with pytest.raises(TimeTagError):
            enumber_product(basis_projector(2, 0, 0), basis_projector(2, 0, 1))

    def test_width_mismatch_rejected(self):
        with pytest.raises(ValidationError):
            basis_projector(1, 0) + basis_projector(2, 0)

    def test_scalar_multiples(self):
        x = 3 * basis_projector(2, 1)
        assert x.coefficient(1) == 3
        assert (x * Fraction(1, 3)).coefficient(1) == 1

    def test_tensor_index_convention(self):
        # Left factor supplies the high bits: index is a * 2**Ny + b.
        prod = tensor(basis_projector(1, 1), basis_projector(1, 0))
        assert prod == basis_projector(2, 2)

    def test_tensor_of_units_is_unit(self):
        assert tensor(unit_enumber(1), unit_enumber(2)) == unit_enumber(3)

    def test_tensor_bilinear_on_scalars(self):
        x = 2 * basis_projector(1, 0)
        y = 3 * basis_projector(1, 1)
        assert tensor(x, y) == 6 * basis_projector(2, 1)


class TestLiftAndEvolution:
    def test_lift_of_identity_fixes_everything(self):
        b = state_enumber(2)
        assert lift_function(lambda c: c, b) == b

    def test_lift_square_on_single_bit_word(self):
        b = state_enumber(1)
        assert lift_function(lambda c: c * c, b) == b

    def test_lift_applies_componentwise(self):
        b = state_enumber(2)
        out = lift_function(lambda c: 2 * c + 1, b)
        assert out.coeffs == (Fraction(1), Fraction(3), Fraction(5), Fraction(7))

    def test_retime_relabels_projectors(self):
        # P_b(t+1) = P_{f_inverse(b)}(t): near-Toffoli words swap coefficients.
        step = toffoli_step()
        b = state_enumber(3)
        out = retime(b, step)
        assert out.time_tag == 1
        assert out.coefficient(3) == 7
        assert out.coefficient(7) == 3
        assert out.coefficient(5) == 5

    def test_evolved_word_observable_is_next_state(self):
        step = toffoli_step()
        out = evolve_enumber(state_enumber(3), step)
        assert out == state_enumber(3, time_tag=1)

    def test_projector_evolution_matches_permutation(self):
        step = toffoli_step()
        for b in range(8):
            out = evolve_enumber(basis_projector(3, b), step)
            assert out == basis_projector(3, step(b), time_tag=1)

    def test_multiplicities_ride_through_retime(self):
        # Evolving the ensemble and retiming its e-number give the same
        # answer when both are read against same-time projectors.
        e = Ensemble.from_mapping(3, FOUR_GROUPS)
        steps = [toffoli_step(), compose_step((cnot(1, 2), not_(3)), 3)]
        mu = mu_enumber(e)
        evolved = e
        for t, step in enumerate(steps):
            mu = retime(mu, step)
            evolved = evolve_multiplicities(evolved, step)
            for b in range(8):
                proj = basis_projector(3, b, time_tag=t + 1)
                assert scalar_product(mu, proj) == evolved.multiplicity(b)

    @given(st.randoms(use_true_random=False))
    @settings(max_examples=25)
    def test_picture_equivalence_random_programs(self, rnd):
        mults = {w: rnd.randint(1, 5) for w in rnd.sample(range(8), 4)}
        e = Ensemble.from_mapping(3, mults)
        mu = mu_enumber(e)
        for t in range(3):
            bits = rnd.sample(range(1, 4), 3)
            step = compose_step((toffoli(*bits),), 3)
            e = evolve_multiplicities(e, step)
            mu = retime(mu, step)
        for b in range(8):
            assert scalar_product(mu, basis_projector(3, b, 3)) == e.multiplicity(b)


class TestReconstruction:
    def test_projectors_recovered_from_word_observables(self):
        step = toffoli_step()
        words = [state_enumber(3)]
        words.append(evolve_enumber(words[-1], step))
        recon = reconstruct_projectors_from_algebra(words)
        for t in range(2):
            for b in range(8):
                assert recon[t][b] == basis_projector(3, b, time_tag=t)

    def test_reconstructed_family_is_orthogonal_resolution(self):
        step = compose_step((cnot(2, 1),), 2)
        words = [state_enumber(2), evolve_enumber(state_enumber(2), step)]
        recon = reconstruct_projectors_from_algebra(words)
        for row in recon:
            total = zero_enumber(2, row[0].time_tag)
            for p in row:
                assert enumber_product(p, p) == p
                total = total + p
            assert total == unit_enumber(2, row[0].time_tag)
