"""Shared helpers for the test suite."""
import numpy as np
import pytest

from branchflow.classical import Gate
from branchflow.heisenberg import (
    ConditionalOp,
    GateOp,
    PhaseOp,
    QuantumCircuit,
    UnitaryOp,
    haar_unitary,
)


CRITERION_RESULTS: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if CRITERION_RESULTS:
        terminalreporter.write_line("")
        terminalreporter.write_line("acceptance criteria:")
        for line in CRITERION_RESULTS:
            terminalreporter.write_line("  " + line)


@pytest.fixture
def rng():
    return np.random.default_rng(20260819)


def random_classical_step(rng, width):
    """One synchronous step of disjoint classical-analogue gates."""
    free = list(range(1, width + 1))
    rng.shuffle(free)
    ops = []
    while free:
        roll = rng.random()
        if roll < 0.35 and len(free) >= 3:
            ops.append(GateOp(Gate("toffoli", (free.pop(), free.pop(), free.pop()))))
        elif roll < 0.65 and len(free) >= 2:
            ops.append(GateOp(Gate("cnot", (free.pop(), free.pop()))))
        elif roll < 0.8:
            ops.append(GateOp(Gate("not", (free.pop(),))))
        elif roll < 0.9 and len(free) >= 2:
            ops.append(GateOp(Gate("swap", (free.pop(), free.pop()))))
        else:
            ops.append(PhaseOp(free.pop(), 0.0))
        if rng.random() < 0.5:
            break
    return tuple(ops)


def random_classical_circuit(rng, width, steps):
    return QuantumCircuit(
        width, tuple(random_classical_step(rng, width) for _ in range(steps))
    )


def random_gate_op(rng, width):
    """A single random gate from the mixed (quantum) pool, as a 1-op step."""
    kind = rng.integers(0, 4)
    if kind == 0 and width >= 3:
        k, l, m = rng.choice(np.arange(1, width + 1), size=3, replace=False)
        return GateOp(Gate("toffoli", (int(k), int(l), int(m))))
    if kind == 1 and width >= 2:
        m, n = rng.choice(np.arange(1, width + 1), size=2, replace=False)
        return GateOp(Gate("cnot", (int(m), int(n))))
    if kind == 2:
        q = int(rng.integers(1, width + 1))
        return PhaseOp(q, float(rng.uniform(0, 2 * np.pi)))
    q = int(rng.integers(1, width + 1))
    return UnitaryOp((q,), haar_unitary(2, rng))


def random_mixed_circuit(rng, width, gates):
    return QuantumCircuit(
        width, tuple((random_gate_op(rng, width),) for _ in range(gates))
    )


def random_conditional_circuit(rng, width, steps=1):
    half = 1 << (width - 1)
    ops = []
    for _ in range(steps):
        table = tuple(int(v) for v in rng.permutation(half))
        ops.append((ConditionalOp(table, haar_unitary(half, rng)),))
    return QuantumCircuit(width, tuple(ops))
