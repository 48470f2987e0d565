"""Acceptance gate: the twelve observable guarantees, one test each.

Each test prints one ``criterion NN: PASS/FAIL`` line; the conftest summary
hook repeats the collected lines after the run so they survive capture.
"""
import itertools
import json
import shutil
import subprocess
import time
from contextlib import contextmanager
from fractions import Fraction
from pathlib import Path

import numpy as np

from branchflow.analyzer import (
    check_autonomy,
    check_correspondence,
    measurement_robustness_check,
    monitored_circuit,
    verify_classical_step,
)
from branchflow.classical import (
    StepPermutation,
    cnot,
    compose_step,
    delay,
    not_,
    program,
    toffoli,
)
from branchflow.cli import main as cli_main
from branchflow.documents import parse, render
from branchflow.ensembles import (
    Ensemble,
    basis_projector,
    branches,
    enumber_product,
    evolve_enumber,
    evolve_multiplicities,
    mu_enumber,
    reconstruct_projectors_from_algebra,
    retime,
    scalar_product,
    state_enumber,
    unit_enumber,
    zero_enumber,
)
from branchflow.heisenberg import (
    ConditionalOp,
    GateOp,
    PhaseOp,
    branch_observable,
    circuit,
    cnot_closed_form,
    cnot_unitary,
    conjugate_descriptor,
    expectation,
    haar_unitary,
    init_network,
    projector_word,
    relation_residuals,
    run_heisenberg,
    schrodinger_oracle,
    step,
    step_classical_table,
    toffoli_closed_form,
    toffoli_unitary,
)
from branchflow.runner import circuit_from_document, emit, orchestrate

from conftest import (
    CRITERION_RESULTS,
    random_classical_circuit,
    random_gate_op,
    random_mixed_circuit,
)

CORPUS = Path(__file__).parent / "corpus"
GOLDEN = Path(__file__).parent / "golden"


@contextmanager
def criterion(num, summary):
    try:
        yield
    except BaseException:
        line = f"criterion {num:2d}: FAIL - {summary}"
        CRITERION_RESULTS.append(line)
        print(line, flush=True)
        raise
    line = f"criterion {num:2d}: PASS - {summary}"
    CRITERION_RESULTS.append(line)
    print(line, flush=True)


def random_state(dim, rng):
    psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return psi / np.linalg.norm(psi)


def random_frame(width, rng):
    u = haar_unitary(1 << width, rng)
    return tuple(conjugate_descriptor(d, u) for d in init_network(width).descriptors)


def test_criterion_01_relation_preservation():
    rng = np.random.default_rng(11)
    started = time.perf_counter()
    worst = 0.0
    with criterion(1, "descriptor relations across 100 random 200-gate circuits"):
        for index in range(100):
            width = 2 + index % 4
            circ = random_mixed_circuit(rng, width, 200)
            net = init_network(width)
            checkpoints = set(range(0, 201, 25)) | {200}
            for t, ops in enumerate(circ.steps, start=1):
                net = step(net, ops)
                if t in checkpoints:
                    res = relation_residuals(net.descriptors)
                    worst = max(worst, *res.values())
                    assert res["idempotence"] < 1e-10
                    assert res["cyclic"] < 1e-10
                    assert res["commutation"] < 1e-10
        elapsed = time.perf_counter() - started
        assert elapsed < 60.0, f"relation sweep took {elapsed:.1f}s"
    print(f"    max residual {worst:.2e}, {elapsed:.1f}s")


def test_criterion_02_closed_forms_match_conjugation():
    rng = np.random.default_rng(22)
    with criterion(2, "gate-local closed forms equal conjugation at 1e-12"):
        for width, count in ((3, 25), (4, 25)):
            for _ in range(count):
                descs = random_frame(width, rng)
                k, l, m = (int(q) for q in rng.choice(width, 3, replace=False))
                dk, dl, dm = descs[k], descs[l], descs[m]
                u = toffoli_unitary(dk, dl, dm)
                got = toffoli_closed_form(dk, dl, dm)
                want = [conjugate_descriptor(d, u) for d in (dk, dl, dm)]
                for g, w in zip(got, want):
                    assert np.abs(g.stacked - w.stacked).max() < 1e-12
                a, b = (int(q) for q in rng.choice(width, 2, replace=False))
                da, db = descs[a], descs[b]
                uc = cnot_unitary(da, db)
                got_c = cnot_closed_form(da, db)
                want_c = [conjugate_descriptor(d, uc) for d in (da, db)]
                for g, w in zip(got_c, want_c):
                    assert np.abs(g.stacked - w.stacked).max() < 1e-12


def test_criterion_03_schrodinger_oracle_equivalence():
    rng = np.random.default_rng(33)
    worst = 0.0
    with criterion(3, "descriptor weights equal state-vector probabilities"):
        for index in range(100):
            width = 2 + index % 4
            steps = int(rng.integers(1, 51))
            circ = random_mixed_circuit(rng, width, steps)
            psi0 = random_state(1 << width, rng)
            hist = run_heisenberg(circ, initial=psi0)
            _, dists = schrodinger_oracle(circ, initial=psi0)
            for t in range(steps + 1):
                gap = float(np.abs(hist.weights(t) - dists[t]).max())
                worst = max(worst, gap)
                assert gap < 1e-10
            # Spot-check that the weight identity agrees with the literal
            # projector expectation route.
            net = hist.network(steps)
            for b in rng.choice(1 << width, 2, replace=False):
                via_projector = expectation(net, projector_word(net, int(b)))
                assert abs(via_projector - dists[-1][int(b)]) < 1e-10
    print(f"    max probability gap {worst:.2e}")


def test_criterion_04_correspondence_on_classical_circuits():
    rng = np.random.default_rng(44)
    with criterion(4, "ensemble proportions track quantum weights at 1e-10"):
        for index in range(100):
            width = 2 + index % 4
            circ = random_classical_circuit(rng, width, int(rng.integers(1, 7)))
            size = 1 << width
            support = rng.choice(size, min(4, size), replace=False)
            mults = {int(w): int(rng.integers(1, 9)) for w in support}
            ens0 = Ensemble.from_mapping(width, mults)
            amps = np.zeros(size, dtype=complex)
            for w, m in ens0.items:
                amps[w] = float(m / ens0.total) ** 0.5
            hist = run_heisenberg(circ, initial=amps)
            ensembles = [ens0]
            for ops in circ.steps:
                table = step_classical_table(ops, width)
                perm = StepPermutation.from_table(width, table)
                ensembles.append(evolve_multiplicities(ensembles[-1], perm))
            report = check_correspondence(hist, ensembles, tol=1e-10)
            assert report.passed, f"deviation {report.max_deviation:.2e}"

        # Four-group reproduction: counts {4,2,1,5} ride through unchanged.
        prog = program(3, (toffoli(1, 2, 3),), (cnot(1, 2),), (not_(3),))
        ens = Ensemble.from_mapping(3, {0: 4, 1: 2, 2: 1, 3: 5})
        branch_list = branches(ens, prog)
        assert [b.multiplicity for b in branch_list] == [4, 2, 1, 5]
        circ = circuit(
            3, (GateOp(toffoli(1, 2, 3)),), (GateOp(cnot(1, 2)),), (GateOp(not_(3)),)
        )
        amps = np.sqrt(np.array([4, 2, 1, 5, 0, 0, 0, 0]) / 12)
        hist = run_heisenberg(circ, initial=amps)
        for t in range(4):
            weights = hist.weights(t)
            live = {b: w for b, w in enumerate(weights) if w > 1e-12}
            assert len(live) == 4  # four branches at every time
            got = sorted(live.values())
            want = sorted([4 / 12, 2 / 12, 1 / 12, 5 / 12])
            assert np.allclose(got, want, atol=1e-10)
            for branch in branch_list:
                b = branch.trajectory[t].value
                assert abs(weights[b] - float(branch.multiplicity / 12)) < 1e-10


def test_criterion_05_branch_conservation_exhaustive():
    gates = (toffoli(1, 2, 3), toffoli(1, 3, 2), toffoli(2, 3, 1))
    steps = [compose_step((g,), 3) for g in gates]
    with criterion(5, "branch count and multiplicities exact over all programs"):
        supports = [
            combo
            for size in (1, 2, 3, 4)
            for combo in itertools.combinations(range(8), size)
        ]
        programs = [
            seq
            for length in range(5)
            for seq in itertools.product(range(3), repeat=length)
        ]
        for support in supports:
            for pattern in (lambda i: i + 1, lambda i: 1):
                mults = {w: pattern(i) for i, w in enumerate(support)}
                start = Ensemble.from_mapping(3, mults)
                for seq in programs:
                    ens = start
                    for gate_index in seq:
                        ens = evolve_multiplicities(ens, steps[gate_index])
                    assert len(ens.support()) == len(support)
                    assert sorted(m for _, m in ens.items) == sorted(mults.values())
                    assert ens.total == start.total


def test_criterion_06_control_and_delay_invariance():
    rng = np.random.default_rng(66)
    with criterion(6, "controlled-not control z and phase-step z fixed at 1e-12"):
        for _ in range(20):
            width = int(rng.integers(2, 5))
            net = init_network(width)
            for _ in range(int(rng.integers(1, 12))):
                net = step(net, (random_gate_op(rng, width),))
            m, n = (int(q) + 1 for q in rng.choice(width, 2, replace=False))
            before = net.component(m, "z")
            after = step(net, (GateOp(cnot(m, n)),)).component(m, "z")
            assert np.abs(after - before).max() < 1e-12

            q = int(rng.integers(1, width + 1))
            zs = [net.component(k, "z") for k in range(1, width + 1)]
            rotated = step(net, (PhaseOp(q, float(rng.uniform(0, 2 * np.pi))),))
            for k in range(1, width + 1):
                assert np.abs(rotated.component(k, "z") - zs[k - 1]).max() < 1e-12


def test_criterion_07_one_way_information_flow():
    rng = np.random.default_rng(77)
    with criterion(7, "phases never reach z; bit flips reach later x"):
        for _ in range(20):
            width = 4
            tail = random_classical_circuit(rng, width, 4).steps
            flip_bit = int(rng.integers(1, width + 1))
            others = [q for q in range(1, width + 1) if q != flip_bit]
            coupler = (GateOp(toffoli(others[0], flip_bit, others[1])),)

            base = circuit(width, (GateOp(delay(flip_bit)),), coupler, *tail)
            phased = circuit(
                width,
                tuple(PhaseOp(q, float(rng.uniform(0.3, 5.0))) for q in range(1, 5)),
                coupler,
                *tail,
            )
            flipped = circuit(width, (GateOp(not_(flip_bit)),), coupler, *tail)

            hist = run_heisenberg(base)
            hist_phase = run_heisenberg(phased)
            hist_flip = run_heisenberg(flipped)

            for t in range(1, hist.num_steps + 1):
                for k in range(1, width + 1):
                    gap = np.abs(
                        hist_phase.network(t).component(k, "z")
                        - hist.network(t).component(k, "z")
                    ).max()
                    assert gap < 1e-12

            x_gap = 0.0
            for t in range(1, hist.num_steps + 1):
                for k in range(1, width + 1):
                    gap = float(
                        np.abs(
                            hist_flip.network(t).component(k, "x")
                            - hist.network(t).component(k, "x")
                        ).max()
                    )
                    x_gap = max(x_gap, gap)
            assert x_gap > 0.1


def test_criterion_08_conditional_decomposition():
    rng = np.random.default_rng(88)
    with criterion(8, "control-on sector autonomous; whole step not classical"):
        for width, count in ((3, 10), (4, 5)):
            half = 1 << (width - 1)
            for _ in range(count):
                f = tuple(int(v) for v in rng.permutation(half))
                u = haar_unitary(half, rng)
                circ = circuit(width, (ConditionalOp(f, u),))
                psi0 = random_state(1 << width, rng)
                hist = run_heisenberg(circ, initial=psi0)

                report = check_autonomy(hist, "zN", tol=1e-10)
                assert report.autonomous

                verdict = verify_classical_step(hist, 0)
                assert not verdict.classical

                net = hist.network(1)
                ident = np.eye(1 << width, dtype=complex)
                total = sum(
                    expectation(net, branch_observable(net, k, ident))
                    for k in range(half)
                )
                control_on = expectation(net, net.component(width, "z"))
                assert abs(total - control_on) < 1e-10


def test_criterion_09_measurement_robustness():
    rng = np.random.default_rng(99)
    with criterion(9, "full z-monitoring keeps weights, disturbs x descriptors"):
        for _ in range(20):
            circ = random_classical_circuit(rng, 3, 2)
            psi0 = random_state(8, rng)
            report = measurement_robustness_check(circ, (1, 2, 3), initial=psi0)
            assert report.passed
            assert report.max_deviation < 1e-10

            isolated = run_heisenberg(circ, initial=psi0)
            wide = monitored_circuit(circ, (1, 2, 3))
            wide_psi = np.zeros(1 << wide.width, dtype=complex)
            wide_psi[:8] = psi0
            wide_run = run_heisenberg(wide, initial=wide_psi)
            pad = np.eye(1 << (wide.width - 3), dtype=complex)
            x_gap = 0.0
            final = wide_run.network(wide.num_steps)
            iso_final = isolated.network(circ.num_steps)
            for k in (1, 2, 3):
                embedded = np.kron(pad, iso_final.component(k, "x"))
                gap = float(np.abs(embedded - final.component(k, "x")).max())
                x_gap = max(x_gap, gap)
            assert x_gap > 0.1


def test_criterion_10_interference_sandwich_reproduction():
    with criterion(10, "branch/merge run matches the frozen graph byte-for-byte"):
        doc = parse((CORPUS / "fig3.bfc").read_text())
        result = orchestrate(doc)
        trace = result.traces[0]
        rows_by_t = {}
        links_by_t = {}
        for t, b, w, link in trace.rows:
            rows_by_t.setdefault(t, []).append((b, w))
            links_by_t.setdefault(t, []).append(link)
        assert len(rows_by_t[0]) == 1  # homogeneous pre-ensemble
        assert rows_by_t[0][0][0] == 1
        assert abs(rows_by_t[0][0][1] - 1.0) < 1e-12
        for t in (1, 2, 3, 4):
            assert len(rows_by_t[t]) == 4
        assert all(link is None for link in links_by_t[0])
        for t in (1, 2, 3):
            assert all(link is not None for link in links_by_t[t])
        assert all(link is None for link in links_by_t[4])

        # Final weight 1 on the classically transported word, per the oracle.
        circ = circuit_from_document(doc)
        _, dists = schrodinger_oracle(circ, initial=0b01)
        assert len(rows_by_t[5]) == 1
        assert rows_by_t[5][0][0] == 2
        assert abs(rows_by_t[5][0][1] - dists[-1][2]) < 1e-12
        assert abs(dists[-1][2] - 1.0) < 1e-10

        assert emit(result, "dot") == (GOLDEN / "fig3.dot").read_text()


def test_criterion_11_ensemble_algebra_exhaustive():
    with criterion(11, "projector algebra exact over every word at widths 1-3"):
        for width in (1, 2, 3):
            size = 1 << width
            projs = [basis_projector(width, b) for b in range(size)]
            for a in range(size):
                for b in range(size):
                    assert scalar_product(projs[a], projs[b]) == (1 if a == b else 0)
                    prod = enumber_product(projs[a], projs[b])
                    assert prod == (projs[a] if a == b else zero_enumber(width))
            total = zero_enumber(width)
            for p in projs:
                total = total + p
            assert total == unit_enumber(width)

            mults = {b: Fraction(b + 2, 3) for b in range(size)}
            ens = Ensemble.from_mapping(width, mults)
            mu = mu_enumber(ens)
            for b in range(size):
                assert scalar_product(mu, projs[b]) == mults[b]
            assert scalar_product(mu, unit_enumber(width)) == ens.total

        # Evolution: every single-gate step at width 3, both pictures.
        gates = [toffoli(1, 2, 3), toffoli(2, 3, 1), cnot(1, 2), cnot(3, 1), not_(2)]
        for gate in gates:
            perm = compose_step((gate,), 3)
            ens = Ensemble.from_mapping(3, {b: b + 1 for b in range(8)})
            mu = mu_enumber(ens)
            moved = evolve_multiplicities(ens, perm)
            retimed = retime(mu, perm)
            for b in range(8):
                proj = basis_projector(3, b, time_tag=1)
                assert scalar_product(retimed, proj) == moved.multiplicity(b)
            word = evolve_enumber(state_enumber(3), perm)
            assert word == state_enumber(3, time_tag=1)
            recon = reconstruct_projectors_from_algebra(
                [state_enumber(3), word]
            )
            for t in range(2):
                for b in range(8):
                    assert recon[t][b] == basis_projector(3, b, time_tag=t)


def test_criterion_12_cli_round_trip_and_exit_codes(tmp_path, capsys):
    with criterion(12, "corpus round-trips; emissions stable; exits 0/1/2"):
        docs = sorted(CORPUS.glob("*.bfc"))
        assert len(docs) >= 10
        for path in docs:
            doc = parse(path.read_text())
            printed = render(doc)
            assert parse(printed) == doc
            assert render(parse(printed)) == printed
            result = orchestrate(doc)
            for fmt in ("csv", "dot", "json"):
                assert emit(result, fmt) == emit(orchestrate(doc), fmt)

        assert cli_main(["run", str(CORPUS / "toffoli_pair.bfc")]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["schema"] == "branchflow-run/1"

        assert cli_main(["run", str(CORPUS / "noncorrespond.bfc")]) == 2
        capsys.readouterr()

        bad = tmp_path / "bad.bfc"
        bad.write_text("qubits 3\ninit basis 0\nstep toffoli 1 2 2\n")
        assert cli_main(["run", str(bad)]) == 1
        assert "error: line 3" in capsys.readouterr().err

        exe = shutil.which("branchflow")
        if exe:
            proc = subprocess.run(
                [exe, "print", str(CORPUS / "fig1.bfc")],
                capture_output=True,
                text=True,
            )
            assert proc.returncode == 0
            assert proc.stdout == render(parse((CORPUS / "fig1.bfc").read_text()))
