"""Quantum networks in the Heisenberg picture.

Each qubit k is represented at each time by a descriptor: three Hermitian
idempotent matrices (x, y, z), the Boolean observables of the qubit. The state
vector is constant; gates act by updating descriptors. Internally a network
stores the cumulative step unitary W(t) = U_t ... U_1 and recomputes
descriptor components as W(t)^dag (initial component) W(t) on demand, which
keeps the defining relations exact up to floating-point unitarity drift.

Basis convention: qubit k owns bit k of the basis index, bit 1 least
significant, so the z-component of qubit k at time 0 is diagonal with entry
bit_k(b) at basis state b.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .classical import BitWord, Gate, compose_step
from .errors import ResourceLimitError, ValidationError

DEFAULT_QUBIT_CAP = 10
SINGLE_GATE_TOL = 1e-12
MULTI_GATE_TOL = 1e-10
UNITARY_TOL = 1e-9

AXES = ("x", "y", "z")

_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    a.setflags(write=False)
    return a


def embed_single(op: np.ndarray, k: int, width: int) -> np.ndarray:
    """Embed a one-qubit operator on qubit k into the 2^width space."""
    if not 1 <= k <= width:
        raise ValidationError(f"qubit index {k} out of range 1..{width}")
    return np.kron(
        np.kron(np.eye(1 << (width - k)), op), np.eye(1 << (k - 1))
    ).astype(complex)


def _subspace_indices(qubits: Sequence[int], width: int) -> np.ndarray:
    """Full-space basis indices, indexed by (local word, assignment of the rest)."""
    rest = [i for i in range(1, width + 1) if i not in qubits]
    n = len(qubits)
    rows = np.zeros((1 << n, 1 << len(rest)), dtype=np.int64)
    for j in range(1 << len(rest)):
        base = 0
        for pos, i in enumerate(rest):
            if (j >> pos) & 1:
                base |= 1 << (i - 1)
        for s in range(1 << n):
            v = base
            for pos, q in enumerate(qubits):
                if (s >> pos) & 1:
                    v |= 1 << (q - 1)
            rows[s, j] = v
    return rows


def embed_gate(gate_matrix: np.ndarray, qubits: Sequence[int], width: int) -> np.ndarray:
    """Embed an operator on the listed qubits (first listed = local bit 1)."""
    qubits = list(qubits)
    if len(set(qubits)) != len(qubits):
        raise ValidationError(f"qubit list has repeats: {qubits}")
    if any(not 1 <= q <= width for q in qubits):
        raise ValidationError(f"qubit list {qubits} out of range 1..{width}")
    n = len(qubits)
    if gate_matrix.shape != (1 << n, 1 << n):
        raise ValidationError(
            f"matrix shape {gate_matrix.shape} does not fit {n} qubit(s)"
        )
    idx = _subspace_indices(qubits, width)
    out = np.zeros((1 << width, 1 << width), dtype=complex)
    for j in range(idx.shape[1]):
        out[np.ix_(idx[:, j], idx[:, j])] = gate_matrix
    return out


@functools.lru_cache(maxsize=None)
def initial_component(k: int, axis: str, width: int) -> np.ndarray:
    """b̂_k,axis at time 0: the embedded projector (1 - sigma_axis)/2."""
    local = (np.eye(2) - _PAULI[axis]) / 2
    return _frozen(embed_single(local, k, width))


@functools.lru_cache(maxsize=None)
def initial_components(width: int) -> np.ndarray:
    """All initial components, stacked (qubit, axis, row, col); read-only."""
    comps = np.stack(
        [
            np.stack([initial_component(k, a, width) for a in AXES])
            for k in range(1, width + 1)
        ]
    )
    comps.setflags(write=False)
    return comps


@dataclass(frozen=True, eq=False)
class Descriptor:
    """One qubit's Boolean observables (x, y, z) at one time."""

    x: np.ndarray
    y: np.ndarray
    z: np.ndarray

    def component(self, axis: str) -> np.ndarray:
        return getattr(self, axis)

    @property
    def stacked(self) -> np.ndarray:
        return np.stack([self.x, self.y, self.z])


def relation_residuals(descriptors: Sequence[Descriptor]) -> dict[str, float]:
    """Max deviations from the defining descriptor relations.

    Checks idempotence of every component, the same-qubit cyclic relation
    (1-2x)(1-2y) = i(1-2z) and its two cyclic partners, and componentwise
    commutation between distinct qubits.
    """
    comps = np.stack([d.stacked for d in descriptors])
    n, _, dim, _ = comps.shape
    idem = float(np.abs(comps @ comps - comps).max())

    s = np.eye(dim) - 2 * comps  # (n, 3, dim, dim)
    cyc = 0.0
    for a, b, c in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        cyc = max(cyc, float(np.abs(s[:, a] @ s[:, b] - 1j * s[:, c]).max()))

    flat = comps.reshape(3 * n, dim, dim)
    prod = flat[:, None] @ flat[None, :]
    comm = np.abs(prod - prod.transpose(1, 0, 2, 3))
    same = np.repeat(np.arange(n), 3)
    comm[same[:, None] == same[None, :]] = 0.0
    return {
        "idempotence": idem,
        "cyclic": cyc,
        "commutation": float(comm.max()),
    }


def max_relation_residual(descriptors: Sequence[Descriptor]) -> float:
    return max(relation_residuals(descriptors).values())


def _xor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # XOR of commuting idempotents: a + b - 2ab
    return a + b - 2 * (a @ b)


def toffoli_closed_form(
    dk: Descriptor, dl: Descriptor, dm: Descriptor
) -> tuple[Descriptor, Descriptor, Descriptor]:
    """Gate-local update for a Toffoli with controls k, l and target m.

    The z-outputs are polynomials in z-inputs alone and reproduce the
    classical law b_m' = b_m + b_k b_l - 2 b_k b_l b_m on eigenvalues.
    """
    zl_xm = dl.z @ dm.x
    zk_xm = dk.z @ dm.x
    zk_zl = dk.z @ dl.z
    out_k = Descriptor(_xor(dk.x, zl_xm), _xor(dk.y, zl_xm), dk.z)
    out_l = Descriptor(_xor(dl.x, zk_xm), _xor(dl.y, zk_xm), dl.z)
    out_m = Descriptor(dm.x, _xor(dm.y, zk_zl), _xor(dm.z, zk_zl))
    return out_k, out_l, out_m


def cnot_closed_form(dm: Descriptor, dn: Descriptor) -> tuple[Descriptor, Descriptor]:
    """Gate-local update for a controlled-not with control m, target n.

    The control's z-component is returned unchanged (same matrix object);
    the target's z-output is the XOR polynomial in z-inputs alone.
    """
    out_m = Descriptor(_xor(dm.x, dn.x), _xor(dm.y, dn.x), dm.z)
    out_n = Descriptor(dn.x, _xor(dn.y, dm.z), _xor(dn.z, dm.z))
    return out_m, out_n


def toffoli_unitary(dk: Descriptor, dl: Descriptor, dm: Descriptor) -> np.ndarray:
    """The Toffoli step unitary, assembled from descriptors: 1 - 2 ẑ_k ẑ_l x̂_m."""
    dim = dk.z.shape[0]
    return np.eye(dim) - 2 * (dk.z @ dl.z @ dm.x)


def cnot_unitary(dm: Descriptor, dn: Descriptor) -> np.ndarray:
    """The controlled-not step unitary: 1 - 2 ẑ_m x̂_n."""
    dim = dm.z.shape[0]
    return np.eye(dim) - 2 * (dm.z @ dn.x)


def conjugate_descriptor(d: Descriptor, u: np.ndarray) -> Descriptor:
    uh = u.conj().T
    return Descriptor(uh @ d.x @ u, uh @ d.y @ u, uh @ d.z @ u)


def permutation_matrix(table: Sequence[int]) -> np.ndarray:
    """The unitary sending basis state |b> to |table[b]>."""
    dim = len(table)
    out = np.zeros((dim, dim), dtype=complex)
    for b, fb in enumerate(table):
        out[fb, b] = 1.0
    return out


def permutation_with_phases(
    matrix: np.ndarray, tol: float = SINGLE_GATE_TOL
) -> Optional[tuple[int, ...]]:
    """Extract f when matrix = (phases) x permutation |f(b)><b|, else None.

    Such matrices conjugate every z-diagonal observable exactly as the bare
    permutation does, so they count as classical-analogue.
    """
    mags = np.abs(matrix)
    rows = mags.argmax(axis=0)
    dim = matrix.shape[0]
    if len(set(int(r) for r in rows)) != dim:
        return None
    if np.abs(mags[rows, np.arange(dim)] - 1.0).max() > tol:
        return None
    rest = mags.copy()
    rest[rows, np.arange(dim)] = 0.0
    if rest.max() > tol:
        return None
    return tuple(int(r) for r in rows)


def _check_unitary(matrix: np.ndarray, tol: float = UNITARY_TOL) -> None:
    dim = matrix.shape[0]
    if matrix.shape != (dim, dim):
        raise ValidationError(f"matrix is not square: {matrix.shape}")
    drift = np.abs(matrix.conj().T @ matrix - np.eye(dim)).max()
    if drift > tol:
        raise ValidationError(f"matrix is not unitary (deviation {drift:.2e})")


def conditional_gate_unitary(
    f_table: Sequence[int], u: np.ndarray, width: int
) -> np.ndarray:
    """V = P_Nz * sum_b |f(b)><b| + (1 - P_Nz) * U on qubits 1..width-1.

    Qubit ``width`` is the control and owns the most significant bit, so V is
    block diagonal: the lower-index half carries U, the upper half carries the
    permutation of f.
    """
    if width < 2:
        raise ValidationError("conditional gates need at least 2 qubits")
    half = 1 << (width - 1)
    table = tuple(int(v) for v in f_table)
    if sorted(table) != list(range(half)):
        raise ValidationError("conditional f is not a bijection on the sub-words")
    u = np.asarray(u, dtype=complex)
    if u.shape != (half, half):
        raise ValidationError(
            f"conditional U must be {half}x{half} for width {width}, got {u.shape}"
        )
    _check_unitary(u)
    out = np.zeros((2 * half, 2 * half), dtype=complex)
    out[:half, :half] = u
    for b, fb in enumerate(table):
        out[half + fb, half + b] = 1.0
    return out


@dataclass(frozen=True)
class GateOp:
    """A classical-analogue gate applied as a quantum step item."""

    gate: Gate

    def span(self, width: int) -> frozenset[int]:
        if max(self.gate.bits) > width:
            raise ValidationError(
                f"gate {self.gate.kind}{self.gate.bits} out of range for width {width}"
            )
        return self.gate.touched

    def unitary(self, width: int) -> np.ndarray:
        table = compose_step([self.gate], width).table
        return permutation_matrix(table)

    def classical_table(self, width: int) -> Optional[tuple[int, ...]]:
        return compose_step([self.gate], width).table


@dataclass(frozen=True)
class PhaseOp:
    """Delay-class gate: a z-axis rotation diag(1, e^{i*phase}) on one qubit.

    Leaves the z-component of its qubit matrix-identical; the identity (phase
    zero) is the plain one-step delay.
    """

    qubit: int
    phase: float = 0.0

    def span(self, width: int) -> frozenset[int]:
        if not 1 <= self.qubit <= width:
            raise ValidationError(f"qubit {self.qubit} out of range 1..{width}")
        return frozenset({self.qubit})

    def unitary(self, width: int) -> np.ndarray:
        local = np.diag([1.0, np.exp(1j * self.phase)])
        return embed_single(local, self.qubit, width)

    def classical_table(self, width: int) -> tuple[int, ...]:
        return tuple(range(1 << width))


@dataclass(frozen=True, eq=False)
class UnitaryOp:
    """An arbitrary unitary on an explicit qubit list (first listed = local bit 1)."""

    qubits: tuple[int, ...]
    matrix: np.ndarray

    def __post_init__(self):
        if len(set(self.qubits)) != len(self.qubits) or not self.qubits:
            raise ValidationError(f"bad qubit list {self.qubits}")
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (1 << len(self.qubits),) * 2:
            raise ValidationError(
                f"matrix shape {m.shape} does not fit qubits {self.qubits}"
            )
        _check_unitary(m)
        object.__setattr__(self, "matrix", _frozen(m))

    def span(self, width: int) -> frozenset[int]:
        if any(not 1 <= q <= width for q in self.qubits):
            raise ValidationError(f"qubits {self.qubits} out of range 1..{width}")
        return frozenset(self.qubits)

    def unitary(self, width: int) -> np.ndarray:
        return embed_gate(self.matrix, self.qubits, width)

    def classical_table(self, width: int) -> Optional[tuple[int, ...]]:
        local = permutation_with_phases(self.matrix)
        if local is None:
            return None
        table = []
        idx = _subspace_indices(self.qubits, width)
        out = np.zeros(1 << width, dtype=np.int64)
        for j in range(idx.shape[1]):
            for s in range(idx.shape[0]):
                out[idx[s, j]] = idx[local[s], j]
        return tuple(int(v) for v in out)


@dataclass(frozen=True, eq=False)
class ConditionalOp:
    """Control on qubit N (most significant): apply f if set, else U, to 1..N-1."""

    f_table: tuple[int, ...]
    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "f_table", tuple(int(v) for v in self.f_table))
        object.__setattr__(
            self, "matrix", _frozen(np.asarray(self.matrix, dtype=complex))
        )

    def _width(self) -> int:
        n = (len(self.f_table)).bit_length() - 1
        if 1 << n != len(self.f_table):
            raise ValidationError("conditional f table length must be a power of two")
        return n + 1

    def span(self, width: int) -> frozenset[int]:
        if width != self._width():
            raise ValidationError(
                f"conditional gate is for width {self._width()}, network has {width}"
            )
        return frozenset(range(1, width + 1))

    def unitary(self, width: int) -> np.ndarray:
        return conditional_gate_unitary(self.f_table, self.matrix, width)

    def classical_table(self, width: int) -> Optional[tuple[int, ...]]:
        local = permutation_with_phases(self.matrix)
        if local is None:
            return None
        half = 1 << (width - 1)
        table = [local[b] for b in range(half)]
        table += [half + self.f_table[b] for b in range(half)]
        return tuple(table)


StepOp = Union[GateOp, PhaseOp, UnitaryOp, ConditionalOp]


def _validate_step(ops: Sequence[StepOp], width: int) -> None:
    seen: set[int] = set()
    for op in ops:
        span = op.span(width)
        if seen & span:
            raise ValidationError(
                f"step items must act on disjoint qubits; {sorted(seen & span)} repeated"
            )
        seen |= span


def step_unitary(ops: Sequence[StepOp], width: int) -> np.ndarray:
    _validate_step(ops, width)
    out = np.eye(1 << width, dtype=complex)
    for op in ops:
        out = op.unitary(width) @ out
    return out


def step_classical_table(
    ops: Sequence[StepOp], width: int
) -> Optional[tuple[int, ...]]:
    """The permutation this step effects on basis words, when it is one.

    Exact for gate/phase items; for explicit matrices the step unitary must be
    a permutation up to per-column phases, which conjugates z-diagonal
    observables exactly as the permutation does.
    """
    tables = [op.classical_table(width) for op in ops]
    if all(t is not None for t in tables):
        out = list(range(1 << width))
        for t in tables:
            out = [t[v] for v in out]
        return tuple(out)
    return permutation_with_phases(step_unitary(ops, width))


@dataclass(frozen=True, eq=False)
class QuantumCircuit:
    """An ordered sequence of synchronous steps of disjoint quantum gates."""

    width: int
    steps: tuple[tuple[StepOp, ...], ...]

    def __post_init__(self):
        if self.width < 1:
            raise ValidationError("circuit width must be positive")
        for ops in self.steps:
            _validate_step(ops, self.width)

    @property
    def num_steps(self) -> int:
        return len(self.steps)


def circuit(width: int, *steps) -> QuantumCircuit:
    return QuantumCircuit(width, tuple(tuple(s) for s in steps))


@dataclass(frozen=True, eq=False)
class HeisenbergNetwork:
    """A quantum network at one time: constant state, cumulative unitary W(t).

    Descriptor components are W(t)^dag (initial) W(t), computed on demand;
    maintaining 3N dense matrices eagerly would dominate the cost of stepping.
    """

    width: int
    heis_state: np.ndarray
    cumulative_unitary: np.ndarray
    time: int

    def __post_init__(self):
        psi = np.asarray(self.heis_state, dtype=complex).reshape(-1)
        if psi.shape[0] != 1 << self.width:
            raise ValidationError("state dimension does not match width")
        norm = np.linalg.norm(psi)
        if abs(norm - 1.0) > 1e-9:
            raise ValidationError(f"state norm {norm} is not 1")
        object.__setattr__(self, "heis_state", _frozen(psi / norm))
        w = np.asarray(self.cumulative_unitary, dtype=complex)
        _check_unitary(w)
        object.__setattr__(self, "cumulative_unitary", _frozen(w))

    def component(self, k: int, axis: str) -> np.ndarray:
        w = self.cumulative_unitary
        return w.conj().T @ initial_component(k, axis, self.width) @ w

    def descriptor(self, k: int) -> Descriptor:
        return Descriptor(*(self.component(k, a) for a in AXES))

    @property
    def descriptors(self) -> tuple[Descriptor, ...]:
        comps = self.components_stacked()
        return tuple(Descriptor(*comps[k]) for k in range(self.width))

    def components_stacked(self) -> np.ndarray:
        """All components at this time, shape (width, 3, dim, dim)."""
        w = self.cumulative_unitary
        return (w.conj().T @ initial_components(self.width)) @ w

    def weights(self) -> np.ndarray:
        """<P̂_b(t)> for every b: |(W psi)_b|^2, the rank-1 reduction."""
        v = self.cumulative_unitary @ self.heis_state
        return np.abs(v) ** 2


def init_network(
    width: int,
    initial: Union[int, BitWord] = 0,
    cap: int = DEFAULT_QUBIT_CAP,
) -> HeisenbergNetwork:
    """A fresh network holding a basis word, at time 0, W = identity."""
    if width < 1:
        raise ValidationError("width must be positive")
    if width > cap:
        raise ResourceLimitError(
            f"width {width} exceeds the qubit cap {cap}; raise the cap explicitly"
        )
    word = initial.value if isinstance(initial, BitWord) else int(initial)
    if not 0 <= word < 1 << width:
        raise ValidationError(f"initial word {word} out of range for width {width}")
    psi = np.zeros(1 << width, dtype=complex)
    psi[word] = 1.0
    return HeisenbergNetwork(width, psi, np.eye(1 << width, dtype=complex), 0)


def network_from_state(
    state: np.ndarray, cap: int = DEFAULT_QUBIT_CAP
) -> HeisenbergNetwork:
    state = np.asarray(state, dtype=complex)
    dim = state.shape[0] if state.ndim == 1 else 0
    width = dim.bit_length() - 1
    if dim < 2 or dim != 1 << width:
        raise ValidationError("state length must be a power of two, at least 2")
    if width > cap:
        raise ResourceLimitError(
            f"width {width} exceeds the qubit cap {cap}; raise the cap explicitly"
        )
    return HeisenbergNetwork(width, state, np.eye(dim, dtype=complex), 0)


def step(net: HeisenbergNetwork, ops: Sequence[StepOp]) -> HeisenbergNetwork:
    """Advance one synchronous step; empty steps advance time only."""
    u = step_unitary(ops, net.width)
    return HeisenbergNetwork(
        net.width, net.heis_state, u @ net.cumulative_unitary, net.time + 1
    )


def b_hat(net: HeisenbergNetwork) -> np.ndarray:
    """The word observable sum_k 2^(k-1) ẑ_k(t); spectrum 0..2^N-1."""
    w = net.cumulative_unitary
    diag = np.arange(1 << net.width, dtype=float)
    return (w.conj().T * diag) @ w


def projector_word(net: HeisenbergNetwork, word: Union[int, BitWord]) -> np.ndarray:
    """P̂_b(t) as the product over qubits of b_k ẑ_k + (1-b_k)(1-ẑ_k)."""
    b = word.value if isinstance(word, BitWord) else int(word)
    if not 0 <= b < 1 << net.width:
        raise ValidationError(f"word {b} out of range for width {net.width}")
    dim = 1 << net.width
    out = np.eye(dim, dtype=complex)
    for k in range(1, net.width + 1):
        z = net.component(k, "z")
        factor = z if (b >> (k - 1)) & 1 else np.eye(dim) - z
        out = out @ factor
    return out


def subset_projector(
    net: HeisenbergNetwork, qubits: Sequence[int], word: Union[int, BitWord]
) -> np.ndarray:
    """Projector onto the listed qubits holding the given local word at time t."""
    b = word.value if isinstance(word, BitWord) else int(word)
    if not 0 <= b < 1 << len(qubits):
        raise ValidationError(f"word {b} out of range for {len(qubits)} qubit(s)")
    dim = 1 << net.width
    out = np.eye(dim, dtype=complex)
    for pos, k in enumerate(qubits):
        z = net.component(k, "z")
        factor = z if (b >> pos) & 1 else np.eye(dim) - z
        out = out @ factor
    return out


def expectation(
    net: HeisenbergNetwork, observable: np.ndarray, hermitian_tol: float = 1e-9
) -> float:
    """<psi| X |psi> against the constant state; X must be Hermitian."""
    x = np.asarray(observable, dtype=complex)
    if np.abs(x - x.conj().T).max() > hermitian_tol:
        raise ValidationError("observable is not Hermitian within tolerance")
    psi = net.heis_state
    return float(np.real(psi.conj() @ (x @ psi)))


def branch_observable(
    net: HeisenbergNetwork, sub_word: Union[int, BitWord], observable: np.ndarray
) -> np.ndarray:
    """ẑ_N P̂_k X̂ P̂_k ẑ_N at the network's time, all on the control-on branch.

    ``sub_word`` is the word k on qubits 1..N-1; with X = identity the
    expectation is the joint weight of the control being on and the
    sub-network holding k.
    """
    e = net.component(net.width, "z")
    p = subset_projector(net, range(1, net.width), sub_word)
    x = np.asarray(observable, dtype=complex)
    return e @ p @ x @ p @ e


@dataclass(frozen=True, eq=False)
class HeisenbergHistory:
    """Network snapshots of one run: networks[t] is the state after t steps."""

    circuit: QuantumCircuit
    networks: tuple[HeisenbergNetwork, ...]

    @property
    def width(self) -> int:
        return self.circuit.width

    @property
    def num_steps(self) -> int:
        return self.circuit.num_steps

    def network(self, t: int) -> HeisenbergNetwork:
        if not 0 <= t <= self.num_steps:
            raise ValidationError(f"time {t} out of range 0..{self.num_steps}")
        return self.networks[t]

    def weights(self, t: int) -> np.ndarray:
        return self.network(t).weights()

    def step_ops(self, t: int) -> tuple[StepOp, ...]:
        """The ops carrying the network from time t to t+1."""
        return self.circuit.steps[t]


def run_heisenberg(
    circ: QuantumCircuit,
    initial: Union[int, BitWord, np.ndarray] = 0,
    cap: int = DEFAULT_QUBIT_CAP,
) -> HeisenbergHistory:
    if isinstance(initial, (int, BitWord)):
        net = init_network(circ.width, initial, cap)
    else:
        net = network_from_state(initial, cap)
        if net.width != circ.width:
            raise ValidationError("state length does not match circuit width")
    nets = [net]
    for ops in circ.steps:
        net = step(net, ops)
        nets.append(net)
    return HeisenbergHistory(circ, tuple(nets))


def schrodinger_oracle(
    circ: QuantumCircuit, initial: Union[int, BitWord, np.ndarray] = 0
) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Statevector cross-check: state and outcome distribution at each time.

    Evolves the state vector directly (psi <- U_step psi), never touching the
    descriptor machinery; distribution at t is the componentwise |psi|^2.
    """
    if isinstance(initial, (int, BitWord)):
        word = initial.value if isinstance(initial, BitWord) else int(initial)
        psi = np.zeros(1 << circ.width, dtype=complex)
        psi[word] = 1.0
    else:
        psi = np.asarray(initial, dtype=complex).reshape(-1).copy()
        psi = psi / np.linalg.norm(psi)
    states = [psi]
    dists = [np.abs(psi) ** 2]
    for ops in circ.steps:
        psi = step_unitary(ops, circ.width) @ psi
        states.append(psi)
        dists.append(np.abs(psi) ** 2)
    return states, dists


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Ginibre matrix."""
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(g)
    phases = np.diag(r).copy()
    phases /= np.abs(phases)
    return q * phases
