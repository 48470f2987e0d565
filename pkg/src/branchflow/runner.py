"""Run orchestration: documents in, traces and reports out.

The three engines interpret one document: ``classical`` follows a single
computer through the per-step permutations, ``ensemble`` evolves exact
rational multiplicities, ``quantum`` runs the Heisenberg network. When a
document names no engines they are inferred from the initial condition and
whether every step has a classical analogue; any requested analysis implies
the quantum engine. Emission is deterministic byte-for-byte: keys sorted,
floats fixed to 12 significant digits.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from .analyzer import (
    AutonomyReport,
    BranchTrace,
    ClassicalityVerdict,
    CorrespondenceReport,
    WEIGHT_CUTOFF,
    branch_trace_ensemble,
    branch_trace_quantum,
    check_autonomy,
    check_correspondence,
    circuit_step_candidate,
    ensemble_from_weights,
    ensemble_shadow,
    measurement_robustness_check,
    verify_classical_step,
)
from .classical import Gate, StepPermutation
from .documents import (
    BasisInit,
    CircuitDocument,
    CondItem,
    EnsembleInit,
    GateItem,
    PhaseItem,
    StateInit,
    UnitaryItem,
    render,
)
from .ensembles import Ensemble, evolve_multiplicities
from .errors import ResourceLimitError, ValidationError
from .heisenberg import (
    DEFAULT_QUBIT_CAP,
    MULTI_GATE_TOL,
    ConditionalOp,
    GateOp,
    HeisenbergHistory,
    PhaseOp,
    QuantumCircuit,
    UnitaryOp,
    run_heisenberg,
    step_classical_table,
)

SCHEMA = "branchflow-run/1"


def circuit_from_document(doc: CircuitDocument) -> QuantumCircuit:
    steps = []
    for step in doc.steps:
        ops = []
        for item in step:
            if isinstance(item, GateItem):
                ops.append(GateOp(Gate(item.kind, item.bits)))
            elif isinstance(item, PhaseItem):
                ops.append(PhaseOp(item.qubit, item.phase))
            elif isinstance(item, UnitaryItem):
                ops.append(UnitaryOp(item.qubits, np.array(item.rows, dtype=complex)))
            elif isinstance(item, CondItem):
                ops.append(ConditionalOp(item.f_table, np.array(item.rows, dtype=complex)))
            else:
                raise ValidationError(f"unknown step item {item!r}")
        steps.append(tuple(ops))
    return QuantumCircuit(doc.width, tuple(steps))


def initial_state_vector(doc: CircuitDocument) -> Union[int, np.ndarray]:
    """The quantum engine's initial condition for a document."""
    init = doc.init
    if isinstance(init, BasisInit):
        return init.word
    psi = np.zeros(1 << doc.width, dtype=complex)
    if isinstance(init, EnsembleInit):
        total = sum((m for _, m in init.items), Fraction(0))
        for w, m in init.items:
            psi[w] = float(m / total) ** 0.5
    else:
        for w, a in init.items:
            psi[w] = a
    return psi


def initial_ensemble(doc: CircuitDocument) -> Optional[Ensemble]:
    init = doc.init
    if isinstance(init, BasisInit):
        return Ensemble.from_mapping(doc.width, {init.word: 1})
    if isinstance(init, EnsembleInit):
        return Ensemble.from_mapping(doc.width, dict(init.items))
    return None


@dataclass(frozen=True)
class RunTrace:
    """One engine's emitted history: rows of (t, word, weight, link)."""

    engine: str
    width: int
    rows: tuple[tuple[int, int, float, Optional[int]], ...]


def _trace_from_branches(bt: BranchTrace) -> RunTrace:
    link_maps: list[dict[int, int]] = [
        dict(links) if links is not None else {} for links in bt.links
    ]
    rows = []
    for t, b, w in bt.rows:
        link = link_maps[t].get(b) if t < len(link_maps) else None
        rows.append((t, b, w, link))
    rows.sort(key=lambda r: (r[0], r[1]))
    return RunTrace(bt.engine, bt.width, tuple(rows))


@dataclass(frozen=True)
class ClassicalityReport:
    """Per-step classicality verdicts; passes when every step is classical."""

    verdicts: tuple[ClassicalityVerdict, ...]
    passed: bool

    @property
    def kind(self) -> str:
        return "classicality"


@dataclass(frozen=True)
class ReportEntry:
    kind: str
    detail: object
    passed: bool


@dataclass(frozen=True)
class RunResult:
    document: CircuitDocument
    engines: tuple[str, ...]
    tolerance: float
    traces: tuple[RunTrace, ...]
    reports: tuple[ReportEntry, ...]
    passed: bool


def _infer_engines(doc: CircuitDocument, all_classical: bool) -> tuple[str, ...]:
    if isinstance(doc.init, StateInit):
        return ("quantum",)
    if isinstance(doc.init, EnsembleInit):
        return ("ensemble", "quantum") if all_classical else ("quantum",)
    return ("classical", "ensemble", "quantum") if all_classical else ("quantum",)


def orchestrate(
    doc: CircuitDocument,
    tolerance: Optional[float] = None,
    max_qubits: Optional[int] = None,
) -> RunResult:
    """Run a document's engines and analyses; deterministic, no sampling."""
    tol = MULTI_GATE_TOL if tolerance is None else float(tolerance)
    cap = DEFAULT_QUBIT_CAP if max_qubits is None else int(max_qubits)
    if doc.width > cap:
        raise ResourceLimitError(
            f"document width {doc.width} exceeds the qubit cap {cap}"
        )

    circ = circuit_from_document(doc)
    tables = [step_classical_table(ops, doc.width) for ops in circ.steps]
    all_classical = all(t is not None for t in tables)

    engines = doc.engines or _infer_engines(doc, all_classical)
    if doc.analyses and "quantum" not in engines:
        engines = tuple(engines) + ("quantum",)

    if "classical" in engines:
        if not isinstance(doc.init, BasisInit):
            raise ValidationError(
                "the classical engine needs a basis initial condition"
            )
        if not all_classical:
            raise ValidationError(
                "the classical engine needs every step to have a classical analogue"
            )
    if "ensemble" in engines:
        if isinstance(doc.init, StateInit):
            raise ValidationError(
                "the ensemble engine needs a basis or ensemble initial condition"
            )
        if not all_classical:
            raise ValidationError(
                "the ensemble engine needs every step to have a classical analogue"
            )

    perms = [
        StepPermutation(doc.width, t, (frozenset(range(1, doc.width + 1)),))
        if t is not None
        else None
        for t in tables
    ]

    traces: list[RunTrace] = []
    ensembles: Optional[list[Ensemble]] = None
    history: Optional[HeisenbergHistory] = None

    if "classical" in engines:
        word = doc.init.word
        traj = [word]
        for perm in perms:
            traj.append(perm(traj[-1]))
        rows = tuple((t, b, 1.0) for t, b in enumerate(traj))
        links = tuple(((traj[t], traj[t + 1]),) for t in range(len(perms)))
        bt = BranchTrace(
            "classical", doc.width, rows, links, tuple(p.table for p in perms)
        )
        traces.append(_trace_from_branches(bt))

    if "ensemble" in engines:
        ens = initial_ensemble(doc)
        ensembles = [ens]
        for perm in perms:
            ensembles.append(evolve_multiplicities(ensembles[-1], perm))
        traces.append(_trace_from_branches(branch_trace_ensemble(ensembles, perms)))

    if "quantum" in engines:
        history = run_heisenberg(circ, initial_state_vector(doc), cap)
        traces.append(_trace_from_branches(branch_trace_quantum(history, tol)))

    reports: list[ReportEntry] = []
    if ensembles is not None and history is not None:
        rep = check_correspondence(history, ensembles, tol)
        reports.append(ReportEntry("correspondence", rep, rep.passed))

    for request in doc.analyses:
        assert history is not None
        if request.kind == "correspondence":
            if ensembles is not None:
                side = ensembles
            else:
                side = ensemble_shadow(
                    circ, ensemble_from_weights(doc.width, history.weights(0))
                )
            rep = check_correspondence(history, side, tol)
            reports.append(ReportEntry("correspondence", rep, rep.passed))
        elif request.kind == "autonomy":
            rep = check_autonomy(history, request.selector, tol=tol)
            reports.append(ReportEntry("autonomy", rep, rep.autonomous))
        elif request.kind == "robustness":
            rep = measurement_robustness_check(
                circ, request.monitor, initial_state_vector(doc), cap, tol
            )
            reports.append(ReportEntry("robustness", rep, rep.passed))
        elif request.kind == "classicality":
            verdicts = tuple(
                verify_classical_step(history, t, circuit_step_candidate(circ, t), tol)
                for t in range(history.num_steps)
            )
            rep = ClassicalityReport(verdicts, all(v.classical for v in verdicts))
            reports.append(ReportEntry("classicality", rep, rep.passed))
        else:
            raise ValidationError(f"unknown analysis kind {request.kind!r}")

    passed = all(r.passed for r in reports)
    return RunResult(doc, tuple(engines), tol, tuple(traces), tuple(reports), passed)


# ---------------------------------------------------------------------------
# Emission


def _fmt_float(x: float) -> str:
    return format(float(x), ".12g")


def _round_floats(value):
    if isinstance(value, float):
        return float(_fmt_float(value))
    if isinstance(value, dict):
        return {k: _round_floats(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_round_floats(v) for v in value]
    return value


def _verdict_json(v: ClassicalityVerdict) -> dict:
    return {
        "t": v.t,
        "classical": v.classical,
        "table": list(v.table) if v.table is not None else None,
        "residual": v.residual,
    }


def _report_json(entry: ReportEntry) -> dict:
    detail = entry.detail
    out: dict = {"kind": entry.kind, "passed": entry.passed}
    if isinstance(detail, CorrespondenceReport):
        out["max_deviation"] = detail.max_deviation
        out["tolerance"] = detail.tolerance
        out["first_failure"] = (
            list(detail.first_failure) if detail.first_failure else None
        )
    elif isinstance(detail, AutonomyReport):
        out["selector"] = detail.selector
        out["interval"] = [detail.t0, detail.t1]
        out["autonomous"] = detail.autonomous
        out["counterexample"] = (
            list(detail.counterexample) if detail.counterexample else None
        )
        out["residuals"] = list(detail.residuals)
        if detail.sector_steps is not None:
            out["sector_steps"] = [
                {
                    "t": s.t,
                    "classical": s.classical,
                    "table": list(s.table) if s.table is not None else None,
                    "residual": s.residual,
                }
                for s in detail.sector_steps
            ]
    elif isinstance(detail, ClassicalityReport):
        out["steps"] = [_verdict_json(v) for v in detail.verdicts]
    return out


def emit(result: RunResult, fmt: str) -> str:
    """Render a run as csv, dot, or json; byte-stable for identical inputs."""
    if fmt == "csv":
        return _emit_csv(result)
    if fmt == "dot":
        return _emit_dot(result)
    if fmt == "json":
        return _emit_json(result)
    raise ValidationError(f"unknown emission format {fmt!r} (csv, dot, json)")


def _emit_csv(result: RunResult) -> str:
    lines = ["t,b,weight,engine,link"]
    for trace in result.traces:
        for t, b, w, link in trace.rows:
            linktext = "" if link is None else str(link)
            lines.append(f"{t},{b},{_fmt_float(w)},{trace.engine},{linktext}")
    return "\n".join(lines) + "\n"


def _emit_dot(result: RunResult) -> str:
    lines = ["digraph branches {", "  rankdir=LR;", "  node [shape=box];"]
    for trace in result.traces:
        lines.append(f"  subgraph cluster_{trace.engine} {{")
        lines.append(f'    label="{trace.engine}";')
        for t, b, w, _ in trace.rows:
            word = format(b, f"0{trace.width}b")
            lines.append(
                f'    "{trace.engine}_{t}_{b}" '
                f'[label="t={t} b=0b{word} w={_fmt_float(w)}"];'
            )
        for t, b, _, link in trace.rows:
            if link is not None:
                lines.append(
                    f'    "{trace.engine}_{t}_{b}" -> "{trace.engine}_{t + 1}_{link}";'
                )
        lines.append("  }")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _emit_json(result: RunResult) -> str:
    payload = {
        "schema": SCHEMA,
        "document": render(result.document),
        "engines": list(result.engines),
        "tolerance": result.tolerance,
        "passed": result.passed,
        "traces": [
            {
                "engine": trace.engine,
                "width": trace.width,
                "rows": [
                    {"t": t, "b": b, "weight": w, "link": link}
                    for t, b, w, link in trace.rows
                ],
            }
            for trace in result.traces
        ],
        "reports": [_report_json(entry) for entry in result.reports],
    }
    return json.dumps(_round_floats(payload), sort_keys=True, indent=2) + "\n"
