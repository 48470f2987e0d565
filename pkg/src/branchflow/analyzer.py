"""Structural analysis of runs: classicality, correspondence, autonomy, flow.

All checks here consume immutable run histories and are pure. Verdicts carry
witnesses (a verified permutation table, a failing word, a residual norm) so
that a failing check is actionable rather than a bare boolean.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from .classical import NetworkProgram, StepPermutation, BitWord, run as run_classical
from .ensembles import Ensemble, evolve_multiplicities
from .errors import ResourceLimitError, ValidationError
from .heisenberg import (
    DEFAULT_QUBIT_CAP,
    MULTI_GATE_TOL,
    ConditionalOp,
    GateOp,
    HeisenbergHistory,
    QuantumCircuit,
    StepOp,
    expectation,
    run_heisenberg,
    step_classical_table,
    step_unitary,
)
from .classical import cnot as cnot_gate

WEIGHT_CUTOFF = 1e-12


# ---------------------------------------------------------------------------
# Classicality of individual steps


@dataclass(frozen=True)
class ClassicalityVerdict:
    """Whether step t acts on the word observable as a lifted function."""

    t: int
    classical: bool
    table: Optional[tuple[int, ...]]
    witness: Optional[object]
    residual: float

    def __bool__(self) -> bool:
        return self.classical


def _as_table(candidate) -> Optional[tuple[int, ...]]:
    if candidate is None:
        return None
    if isinstance(candidate, StepPermutation):
        return candidate.table
    return tuple(int(v) for v in candidate)


def verify_classical_step(
    history: HeisenbergHistory,
    t: int,
    candidate=None,
    tol: float = MULTI_GATE_TOL,
) -> ClassicalityVerdict:
    """Decide whether b̂(t+1) = f(b̂(t)) for some function f.

    A supplied candidate table is checked first. With no candidate (or a
    failing one) f is recovered directly: b̂(t) has the nondegenerate integer
    spectrum 0..2^N-1, so a function of it exists exactly when b̂(t+1) is
    diagonal in b̂(t)'s eigenbasis, and the diagonal then reads off f. The
    eigenbasis is available in closed form from the cumulative unitary, so
    this is an exhaustive search over all functions without enumerating them.
    """
    if not 0 <= t < history.num_steps:
        raise ValidationError(f"step index {t} out of range 0..{history.num_steps - 1}")
    net_t = history.network(t)
    net_next = history.network(t + 1)
    dim = 1 << history.width

    # The z-family at t must commute for "a function of b̂(t)" to make sense.
    comps = [net_t.component(k, "z") for k in range(1, history.width + 1)]
    for i in range(len(comps)):
        for j in range(i + 1, len(comps)):
            comm = float(np.abs(comps[i] @ comps[j] - comps[j] @ comps[i]).max())
            if comm > tol:
                return ClassicalityVerdict(
                    t, False, None, ("noncommuting z-components", i + 1, j + 1), comm
                )

    w_t = net_t.cumulative_unitary
    w_next = net_next.cumulative_unitary
    b_next = (w_next.conj().T * np.arange(dim, dtype=float)) @ w_next

    table = _as_table(candidate)
    if table is not None:
        if len(table) != dim:
            raise ValidationError(f"candidate table must have {dim} entries")
        lifted = (w_t.conj().T * np.asarray(table, dtype=float)) @ w_t
        residual = float(np.abs(b_next - lifted).max())
        if residual <= tol:
            return ClassicalityVerdict(t, True, table, table, residual)

    # Discovery: diagonality of b̂(t+1) in the (closed-form) eigenbasis of b̂(t).
    in_frame = w_t @ b_next @ w_t.conj().T
    off = in_frame - np.diag(np.diag(in_frame))
    off_max = float(np.abs(off).max())
    diag = np.real(np.diag(in_frame))
    rounded = np.rint(diag)
    diag_err = float(np.abs(diag - rounded).max())
    imag_err = float(np.abs(np.imag(np.diag(in_frame))).max())
    residual = max(off_max, diag_err, imag_err)
    if residual <= tol and rounded.min() >= 0 and rounded.max() < dim:
        found = tuple(int(v) for v in rounded)
        return ClassicalityVerdict(t, True, found, found, residual)
    worst = int(np.unravel_index(np.abs(off).argmax(), off.shape)[0])
    return ClassicalityVerdict(t, False, None, worst, residual)


def circuit_step_candidate(circ: QuantumCircuit, t: int) -> Optional[tuple[int, ...]]:
    """Candidate permutation for step t read off the gate list, if any."""
    return step_classical_table(circ.steps[t], circ.width)


# ---------------------------------------------------------------------------
# Correspondence between quantum weights and ensemble proportions


@dataclass(frozen=True)
class CorrespondenceReport:
    """Per-time, per-word deviation |<P̂_b(t)> - mu_b(t)/M| and its maximum."""

    deviations: tuple[tuple[float, ...], ...]
    max_deviation: float
    passed: bool
    tolerance: float
    first_failure: Optional[tuple[int, int]]

    @property
    def kind(self) -> str:
        return "correspondence"


def _report_from_deviations(devs: list[list[float]], tol: float) -> CorrespondenceReport:
    max_dev = 0.0
    first = None
    for t, row in enumerate(devs):
        for b, d in enumerate(row):
            if d > max_dev:
                max_dev = d
            if first is None and d > tol:
                first = (t, b)
    return CorrespondenceReport(
        tuple(tuple(row) for row in devs), max_dev, first is None, tol, first
    )


def check_correspondence(
    history: HeisenbergHistory,
    ensembles: Sequence[Ensemble],
    tol: float = MULTI_GATE_TOL,
) -> CorrespondenceReport:
    """Compare <P̂_b(t)> against mu_b(t)/M at every time."""
    if any(e.width != history.width for e in ensembles):
        raise ValidationError("ensemble width does not match quantum run width")
    if len(ensembles) != history.num_steps + 1:
        raise ValidationError(
            f"need {history.num_steps + 1} ensemble snapshots, got {len(ensembles)}"
        )
    devs = []
    for t, ens in enumerate(ensembles):
        weights = history.weights(t)
        total = ens.total
        props = [0.0] * (1 << history.width)
        for w, m in ens.items:
            props[w] = float(m / total)
        devs.append([abs(float(weights[b]) - props[b]) for b in range(len(props))])
    return _report_from_deviations(devs, tol)


def ensemble_shadow(circ: QuantumCircuit, initial: Ensemble) -> list[Ensemble]:
    """Ensemble trajectory under each step's classical analogue.

    Steps with no classical analogue leave the ensemble unchanged, so a
    correspondence check against this shadow flags the first non-classical
    step as the first deviation.
    """
    if initial.width != circ.width:
        raise ValidationError("ensemble width does not match circuit width")
    out = [initial]
    for ops in circ.steps:
        table = step_classical_table(ops, circ.width)
        if table is None:
            out.append(out[-1])
        else:
            blocks = (frozenset(range(1, circ.width + 1)),)
            perm = StepPermutation(circ.width, table, blocks)
            out.append(evolve_multiplicities(out[-1], perm))
    return out


def ensemble_from_weights(width: int, weights: Sequence[float]) -> Ensemble:
    """Exact-rational ensemble whose proportions equal the given weights."""
    items = {
        b: Fraction(float(w)) for b, w in enumerate(weights) if float(w) > WEIGHT_CUTOFF
    }
    return Ensemble.from_mapping(width, items)


# ---------------------------------------------------------------------------
# Causal autonomy of descriptor families


@dataclass(frozen=True)
class DescriptorSelector:
    """Names a family of observables built from current descriptors.

    ``sector``: None selects the whole network (unit = identity); 1 selects
    the control-on sector (unit = ẑ_N(t)); 0 the control-off sector (unit =
    1 - ẑ_N(t)). ``axes`` lists which components of qubits 1..N-1 (or 1..N
    when sector is None) enter the family, each multiplied by the unit.
    """

    name: str
    axes: tuple[str, ...]
    sector: Optional[int]

    def member_qubits(self, width: int) -> range:
        return range(1, width + 1) if self.sector is None else range(1, width)

    def family(self, net) -> dict[str, np.ndarray]:
        dim = 1 << net.width
        if self.sector is None:
            unit = np.eye(dim, dtype=complex)
        else:
            zn = net.component(net.width, "z")
            unit = zn if self.sector == 1 else np.eye(dim) - zn
        out = {"unit": unit}
        for k in self.member_qubits(net.width):
            for axis in self.axes:
                comp = net.component(k, axis)
                out[f"{axis}{k}"] = comp if self.sector is None else unit @ comp
        return out


_SELECTORS = {
    "allz": DescriptorSelector("allz", ("z",), None),
    "zN": DescriptorSelector("zN", ("z",), 1),
    "xN": DescriptorSelector("xN", ("x",), 1),
    "offN": DescriptorSelector("offN", ("z", "x"), 0),
}


def selector_by_name(name: str) -> DescriptorSelector:
    if name not in _SELECTORS:
        raise ValidationError(
            f"unknown selector {name!r}; expected one of {sorted(_SELECTORS)}"
        )
    return _SELECTORS[name]


@dataclass(frozen=True)
class ClassicalLawRule:
    """Predicts member(t+1) from the family at t by the lifted classical law.

    For each member bit k: sum over words a with bit k of table[a] set of the
    product over bits j of (member_j if bit j of a else unit - member_j).
    The unit itself is predicted unchanged.
    """

    axis: str
    bits: tuple[int, ...]
    table: tuple[int, ...]

    description = "classical update law"

    def predict(self, history, t, family) -> dict[str, np.ndarray]:
        unit = family["unit"]
        members = [family[f"{self.axis}{k}"] for k in self.bits]
        dim = unit.shape[0]
        terms = []
        for a in range(len(self.table)):
            prod = np.eye(dim, dtype=complex)
            for j in range(len(self.bits)):
                f = members[j] if (a >> j) & 1 else unit - members[j]
                prod = prod @ f
            terms.append(prod)
        out = {"unit": unit}
        for pos, k in enumerate(self.bits):
            acc = np.zeros((dim, dim), dtype=complex)
            for a, fa in enumerate(self.table):
                if (fa >> pos) & 1:
                    acc = acc + terms[a]
            out[f"{self.axis}{k}"] = acc
        return out


@dataclass(frozen=True, eq=False)
class SectorConjugationRule:
    """Predicts the sector family at t+1 by conjugating with the sector action.

    The step's unitary restricted to the sector, carried to time t through the
    cumulative unitary, updates every sector observable; nothing outside the
    sector enters.
    """

    sector_matrix: np.ndarray
    sector: int

    description = "sector conjugation"

    def predict(self, history, t, family) -> dict[str, np.ndarray]:
        net = history.network(t)
        width = net.width
        half = 1 << (width - 1)
        full = np.zeros((2 * half, 2 * half), dtype=complex)
        if self.sector == 0:
            full[:half, :half] = self.sector_matrix
        else:
            full[half:, half:] = self.sector_matrix
        w = net.cumulative_unitary
        s = w.conj().T @ full @ w
        sh = s.conj().T
        return {label: sh @ m @ s for label, m in family.items()}


StepRule = Union[ClassicalLawRule, SectorConjugationRule]


def _sector_restriction_table(
    table: tuple[int, ...], width: int, sector: int
) -> Optional[tuple[int, ...]]:
    half = 1 << (width - 1)
    top = half if sector == 1 else 0
    sub = []
    for a in range(half):
        out = table[a + top]
        if (out >= half) != (sector == 1):
            return None  # step does not preserve the sector
        sub.append(out - top)
    return tuple(sub)


def _sector_block(ops: Sequence[StepOp], width: int, sector: int) -> Optional[np.ndarray]:
    if len(ops) == 1 and isinstance(ops[0], ConditionalOp):
        if sector == 0:
            return np.asarray(ops[0].matrix)
        from .heisenberg import permutation_matrix

        return permutation_matrix(ops[0].f_table)
    v = step_unitary(ops, width)
    half = v.shape[0] // 2
    if max(np.abs(v[:half, half:]).max(), np.abs(v[half:, :half]).max()) > 1e-12:
        return None  # step mixes the sectors
    return v[:half, :half] if sector == 0 else v[half:, half:]


def derive_autonomy_rules(
    circ: QuantumCircuit, selector: DescriptorSelector
) -> list[Optional[StepRule]]:
    """Per-step update rules for the selected family, read off the gate list."""
    rules: list[Optional[StepRule]] = []
    for ops in circ.steps:
        if selector.sector is None:
            table = step_classical_table(ops, circ.width)
            if table is None:
                rules.append(None)
            else:
                rules.append(
                    ClassicalLawRule("z", tuple(range(1, circ.width + 1)), table)
                )
            continue
        if selector.sector == 1 and selector.axes in (("z",), ("x",)):
            if len(ops) == 1 and isinstance(ops[0], ConditionalOp):
                sub = ops[0].f_table
            else:
                table = step_classical_table(ops, circ.width)
                sub = (
                    _sector_restriction_table(table, circ.width, 1)
                    if table is not None
                    else None
                )
            if sub is None:
                rules.append(None)
            else:
                rules.append(
                    ClassicalLawRule(
                        selector.axes[0], tuple(range(1, circ.width)), sub
                    )
                )
            continue
        block = _sector_block(ops, circ.width, selector.sector)
        rules.append(
            None if block is None else SectorConjugationRule(block, selector.sector)
        )
    return rules


@dataclass(frozen=True)
class SectorStepVerdict:
    """Whether the sector's own word dynamics at one step follow a permutation."""

    t: int
    classical: bool
    table: Optional[tuple[int, ...]]
    residual: float


def _sector_step_classicality(
    history: HeisenbergHistory, t: int, sector: int, tol: float
) -> SectorStepVerdict:
    width = history.width
    half = 1 << (width - 1)
    idx = np.arange(half) + (half if sector == 1 else 0)
    w_t = history.network(t).cumulative_unitary
    w_next = history.network(t + 1).cumulative_unitary
    q = w_t.conj().T[:, idx]
    # Sector word observable at t+1, restricted to the sector frame of time t.
    zsum = np.zeros((half, half), dtype=complex)
    e_next = history.network(t + 1).component(width, "z")
    if sector == 0:
        e_next = np.eye(1 << width) - e_next
    for k in range(1, width):
        member = e_next @ history.network(t + 1).component(k, "z")
        zsum = zsum + (1 << (k - 1)) * (q.conj().T @ member @ q)
    off = zsum - np.diag(np.diag(zsum))
    diag = np.real(np.diag(zsum))
    rounded = np.rint(diag)
    residual = max(
        float(np.abs(off).max()),
        float(np.abs(diag - rounded).max()),
        float(np.abs(np.imag(np.diag(zsum))).max()),
    )
    if residual <= tol and rounded.min() >= 0 and rounded.max() < half:
        return SectorStepVerdict(t, True, tuple(int(v) for v in rounded), residual)
    return SectorStepVerdict(t, False, None, residual)


@dataclass(frozen=True)
class AutonomyReport:
    """Closure of a descriptor family under its declared per-step dynamics."""

    selector: str
    t0: int
    t1: int
    autonomous: bool
    counterexample: Optional[tuple[int, Optional[float]]]
    residuals: tuple[float, ...]
    tolerance: float
    sector_steps: Optional[tuple[SectorStepVerdict, ...]] = None

    @property
    def kind(self) -> str:
        return "autonomy"

    @property
    def passed(self) -> bool:
        return self.autonomous


def check_autonomy(
    history: HeisenbergHistory,
    selector: Union[str, DescriptorSelector],
    rules: Optional[Sequence[Optional[StepRule]]] = None,
    tol: float = MULTI_GATE_TOL,
    t0: int = 0,
    t1: Optional[int] = None,
) -> AutonomyReport:
    """Verify the selected family is closed under the declared update rules.

    A step with no declared rule (no classical analogue, or a step that mixes
    the sectors) immediately yields a non-autonomous verdict: the family's
    evolution is not expressible in terms of the family by the available laws.
    For sector selectors the report also records, per step, whether the
    sector's own word dynamics follow some permutation (the ensemble-style
    classical criterion applied inside the sector).
    """
    if isinstance(selector, str):
        selector = selector_by_name(selector)
    if selector.sector is not None and history.width < 2:
        raise ValidationError("sector selectors need at least 2 qubits")
    if t1 is None:
        t1 = history.num_steps
    if not 0 <= t0 <= t1 <= history.num_steps:
        raise ValidationError(f"need 0 <= t0 <= t1 <= {history.num_steps}")
    if rules is None:
        rules = derive_autonomy_rules(history.circuit, selector)[t0:t1]
    rules = list(rules)
    if len(rules) != t1 - t0:
        raise ValidationError(f"need {t1 - t0} rules, got {len(rules)}")

    residuals: list[float] = []
    autonomous = True
    counterexample: Optional[tuple[int, Optional[float]]] = None
    for i, t in enumerate(range(t0, t1)):
        rule = rules[i]
        if rule is None:
            autonomous = False
            counterexample = (t, None)
            break
        fam_t = selector.family(history.network(t))
        pred = rule.predict(history, t, fam_t)
        fam_next = selector.family(history.network(t + 1))
        residual = max(
            float(np.abs(pred[label] - fam_next[label]).max()) for label in fam_next
        )
        residuals.append(residual)
        if residual > tol:
            autonomous = False
            counterexample = (t, residual)
            break

    sector_steps = None
    if selector.sector is not None:
        sector_steps = tuple(
            _sector_step_classicality(history, t, selector.sector, tol)
            for t in range(t0, t1)
        )
    return AutonomyReport(
        selector.name,
        t0,
        t1,
        autonomous,
        counterexample,
        tuple(residuals),
        tol,
        sector_steps,
    )


# ---------------------------------------------------------------------------
# Operational information presence


@dataclass(frozen=True)
class InfoPresenceResult:
    """Three-valued verdict on whether a subsystem carries the parameter.

    ``contains_info``: some listed measurement's probability depends on the
    parameter. ``contains_none``: the subsystem's full descriptor set is
    parameter-independent, so no measurement on it can depend on the
    parameter. Otherwise ``inconclusive``.
    """

    verdict: str
    probability_gap: float
    descriptor_gap: float
    witness: Optional[object]


def information_presence_test(
    runs: Sequence[tuple[object, HeisenbergHistory]],
    qubits: Sequence[int],
    measurements: Sequence[tuple[int, np.ndarray]] = (),
    tol: float = MULTI_GATE_TOL,
) -> InfoPresenceResult:
    """Compare runs of a program family that differ only in a parameter."""
    if len(runs) < 2:
        raise ValidationError("need at least two parameter values")
    histories = [h for _, h in runs]
    base = histories[0]
    for h in histories[1:]:
        if h.width != base.width or h.num_steps != base.num_steps:
            raise ValidationError("runs must share width and step count")
        if np.abs(h.network(0).heis_state - base.network(0).heis_state).max() > 1e-12:
            raise ValidationError(
                "runs must share the Heisenberg state; encode the parameter in gates"
            )
    if any(not 1 <= q <= base.width for q in qubits):
        raise ValidationError("subsystem qubit out of range")

    prob_gap = 0.0
    witness = None
    for idx, (t, obs) in enumerate(measurements):
        # The same laboratory measurement applied to each run at time t:
        # carried to the constant state through each run's own history.
        values = []
        for h in histories:
            w = h.network(t).cumulative_unitary
            values.append(expectation(h.network(t), w.conj().T @ obs @ w))
        gap = max(values) - min(values)
        if gap > prob_gap:
            prob_gap = gap
            witness = ("measurement", idx, t)
        if gap > tol:
            return InfoPresenceResult("contains_info", gap, float("nan"), witness)

    desc_gap = 0.0
    for t in range(base.num_steps + 1):
        nets = [h.network(t) for h in histories]
        for k in qubits:
            for axis in ("x", "y", "z"):
                ref = nets[0].component(k, axis)
                for other in nets[1:]:
                    gap = float(np.abs(other.component(k, axis) - ref).max())
                    if gap > desc_gap:
                        desc_gap = gap
                        witness = ("descriptor", k, axis, t)
    if desc_gap <= tol:
        return InfoPresenceResult("contains_none", prob_gap, desc_gap, None)
    return InfoPresenceResult("inconclusive", prob_gap, desc_gap, witness)


# ---------------------------------------------------------------------------
# Measurement / decoherence robustness


def monitored_circuit(
    circ: QuantumCircuit,
    monitored: Sequence[int],
    cap: int = DEFAULT_QUBIT_CAP,
) -> QuantumCircuit:
    """Interleave measurement gates: after every step, each monitored qubit's
    z-observable is copied onto a fresh ancilla by a controlled-not.

    Ancillas are appended above the original qubits, one per monitored qubit
    per step, so the original words occupy the low bits of the wide network.
    """
    monitored = sorted(set(monitored))
    if any(not 1 <= q <= circ.width for q in monitored):
        raise ValidationError("monitored qubit out of range")
    width = circ.width + len(monitored) * circ.num_steps
    if width > cap:
        raise ResourceLimitError(
            f"monitoring needs width {width}, above the cap {cap}"
        )
    steps: list[tuple[StepOp, ...]] = []
    next_ancilla = circ.width + 1
    for ops in circ.steps:
        steps.append(tuple(ops))
        if monitored:
            monitor_ops = []
            for q in monitored:
                monitor_ops.append(GateOp(cnot_gate(q, next_ancilla)))
                next_ancilla += 1
            steps.append(tuple(monitor_ops))
    return QuantumCircuit(width, tuple(steps))


def _embed_initial(initial, circ_width: int, wide_width: int):
    if isinstance(initial, (int, BitWord)):
        word = initial.value if isinstance(initial, BitWord) else int(initial)
        return word  # ancillas start at 0, which are the high bits
    psi = np.asarray(initial, dtype=complex).reshape(-1)
    wide = np.zeros(1 << wide_width, dtype=complex)
    wide[: 1 << circ_width] = psi
    return wide


def measurement_robustness_check(
    circ: QuantumCircuit,
    monitored: Sequence[int],
    initial: Union[int, BitWord, np.ndarray] = 0,
    cap: int = DEFAULT_QUBIT_CAP,
    tol: float = MULTI_GATE_TOL,
) -> CorrespondenceReport:
    """Compare <P̂_b(t)> over the original qubits with and without monitoring.

    The monitored run is sampled at the boundaries following each original
    step (the interleaved measurement step included), and its weights are
    marginalized over the ancillas.
    """
    isolated = run_heisenberg(circ, initial, cap)
    wide = monitored_circuit(circ, monitored, cap)
    wide_run = run_heisenberg(wide, _embed_initial(initial, circ.width, wide.width), cap)
    per_step = 2 if monitored else 1
    devs = []
    for t in range(circ.num_steps + 1):
        iso = isolated.weights(t)
        raw = wide_run.weights(t * per_step)
        marg = raw.reshape(-1, 1 << circ.width).sum(axis=0)
        devs.append([abs(float(iso[b] - marg[b])) for b in range(1 << circ.width)])
    return _report_from_deviations(devs, tol)


# ---------------------------------------------------------------------------
# Branch traces


@dataclass(frozen=True)
class BranchTrace:
    """Per-time weighted words plus persistence links for classical steps.

    ``links[t]`` maps words present at t to their images at t+1, or is None
    when step t has no classical verdict (no way of connecting the columns).
    """

    engine: str
    width: int
    rows: tuple[tuple[int, int, float], ...]
    links: tuple[Optional[tuple[tuple[int, int], ...]], ...]
    step_tables: tuple[Optional[tuple[int, ...]], ...]

    def rows_at(self, t: int) -> list[tuple[int, float]]:
        return [(b, w) for (tt, b, w) in self.rows if tt == t]


def branch_trace_classical(prog: NetworkProgram, b0: BitWord) -> BranchTrace:
    traj = run_classical(prog, b0)
    perms = prog.step_permutations()
    rows = tuple((t, w.value, 1.0) for t, w in enumerate(traj))
    links = tuple(
        ((traj[t].value, traj[t + 1].value),) for t in range(len(perms))
    )
    tables = tuple(p.table for p in perms)
    return BranchTrace("classical", prog.width, rows, links, tables)


def branch_trace_ensemble(
    ensembles: Sequence[Ensemble], perms: Sequence[StepPermutation]
) -> BranchTrace:
    if len(ensembles) != len(perms) + 1:
        raise ValidationError("need one ensemble snapshot per time")
    rows = []
    for t, ens in enumerate(ensembles):
        total = ens.total
        for w, m in ens.items:
            rows.append((t, w, float(m / total)))
    links = tuple(
        tuple((w, perms[t](w)) for w, _ in ensembles[t].items)
        for t in range(len(perms))
    )
    tables = tuple(p.table for p in perms)
    return BranchTrace("ensemble", ensembles[0].width, tuple(rows), links, tables)


def branch_trace_quantum(
    history: HeisenbergHistory,
    tol: float = MULTI_GATE_TOL,
    cutoff: float = WEIGHT_CUTOFF,
) -> BranchTrace:
    rows = []
    present: list[list[int]] = []
    for t in range(history.num_steps + 1):
        weights = history.weights(t)
        here = [b for b in range(len(weights)) if weights[b] > cutoff]
        present.append(here)
        rows.extend((t, b, float(weights[b])) for b in here)
    links: list[Optional[tuple[tuple[int, int], ...]]] = []
    tables: list[Optional[tuple[int, ...]]] = []
    for t in range(history.num_steps):
        verdict = verify_classical_step(
            history, t, circuit_step_candidate(history.circuit, t), tol
        )
        if verdict.classical and verdict.table is not None:
            links.append(tuple((b, verdict.table[b]) for b in present[t]))
            tables.append(verdict.table)
        else:
            links.append(None)
            tables.append(None)
    return BranchTrace(
        "quantum", history.width, tuple(rows), tuple(links), tuple(tables)
    )


def branch_history(source, **kwargs) -> BranchTrace:
    """Branch trace of a quantum history or an (ensembles, perms) pair."""
    if isinstance(source, HeisenbergHistory):
        return branch_trace_quantum(source, **kwargs)
    ensembles, perms = source
    return branch_trace_ensemble(ensembles, perms)
