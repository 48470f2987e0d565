"""Reversible classical computational networks.

A network is synchronous: a program is a sequence of steps, and each step is a
set of gates acting on pairwise disjoint bits. Bits are numbered from 1, and
bit 1 is the least significant bit of the integer encoding of a word, so a
word with bits b_1 .. b_N has value 2^(N-1)*b_N + ... + 2*b_2 + b_1. Bits that
no gate touches during a step pass through an implicit delay.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import ValidationError

GATE_ARITY = {"toffoli": 3, "cnot": 2, "not": 1, "swap": 2, "delay": 1}


@dataclass(frozen=True)
class BitWord:
    """An element of Z_{2^width}."""

    value: int
    width: int

    def __post_init__(self):
        if self.width < 1:
            raise ValidationError(f"width must be positive, got {self.width}")
        if not 0 <= self.value < (1 << self.width):
            raise ValidationError(
                f"value {self.value} out of range for width {self.width}"
            )

    def bit(self, k: int) -> int:
        """Value of bit k (1-indexed, bit 1 = LSB)."""
        if not 1 <= k <= self.width:
            raise ValidationError(f"bit index {k} out of range 1..{self.width}")
        return (self.value >> (k - 1)) & 1

    def bits(self) -> tuple[int, ...]:
        """All bits as (b_1, ..., b_N)."""
        return tuple((self.value >> i) & 1 for i in range(self.width))

    @classmethod
    def from_bits(cls, bits: Sequence[int]) -> "BitWord":
        value = sum((b & 1) << i for i, b in enumerate(bits))
        return cls(value, len(bits))

    def binary(self) -> str:
        """Zero-padded binary literal, most significant bit first."""
        return "0b" + format(self.value, f"0{self.width}b")


@dataclass(frozen=True)
class Gate:
    """A reversible gate from the fixed set toffoli/cnot/not/swap/delay.

    For ``toffoli`` the bits are (k, l, m) with k, l the controls and m the
    target; for ``cnot`` they are (control, target).
    """

    kind: str
    bits: tuple[int, ...]

    def __post_init__(self):
        if self.kind not in GATE_ARITY:
            raise ValidationError(f"unknown gate kind {self.kind!r}")
        if len(self.bits) != GATE_ARITY[self.kind]:
            raise ValidationError(
                f"{self.kind} takes {GATE_ARITY[self.kind]} bit indices, "
                f"got {len(self.bits)}"
            )
        if len(set(self.bits)) != len(self.bits):
            raise ValidationError(f"{self.kind} bit indices must be distinct: {self.bits}")
        if any(b < 1 for b in self.bits):
            raise ValidationError(f"bit indices are 1-based, got {self.bits}")

    @property
    def touched(self) -> frozenset[int]:
        return frozenset(self.bits)

    def apply_to_value(self, v: int) -> int:
        b = self.bits
        if self.kind == "toffoli":
            k, l, m = b
            if (v >> (k - 1)) & 1 and (v >> (l - 1)) & 1:
                v ^= 1 << (m - 1)
        elif self.kind == "cnot":
            control, target = b
            if (v >> (control - 1)) & 1:
                v ^= 1 << (target - 1)
        elif self.kind == "not":
            v ^= 1 << (b[0] - 1)
        elif self.kind == "swap":
            k, l = b
            bk = (v >> (k - 1)) & 1
            bl = (v >> (l - 1)) & 1
            if bk != bl:
                v ^= (1 << (k - 1)) | (1 << (l - 1))
        # delay: identity on values
        return v


def toffoli(k: int, l: int, m: int) -> Gate:
    return Gate("toffoli", (k, l, m))


def cnot(control: int, target: int) -> Gate:
    return Gate("cnot", (control, target))


def not_(k: int) -> Gate:
    return Gate("not", (k,))


def swap(k: int, l: int) -> Gate:
    return Gate("swap", (k, l))


def delay(k: int) -> Gate:
    return Gate("delay", (k,))


def apply_gate(gate: Gate, word: BitWord) -> BitWord:
    """Apply one gate to a word; only participating bits may change."""
    if max(gate.bits) > word.width:
        raise ValidationError(
            f"gate {gate.kind}{gate.bits} out of range for width {word.width}"
        )
    return BitWord(gate.apply_to_value(word.value), word.width)


def _check_disjoint(gates: Sequence[Gate], width: int) -> None:
    seen: set[int] = set()
    for g in gates:
        if max(g.bits) > width:
            raise ValidationError(
                f"gate {g.kind}{g.bits} out of range for width {width}"
            )
        overlap = seen & g.touched
        if overlap:
            raise ValidationError(
                f"gates within one step must be disjoint; bit(s) {sorted(overlap)} repeated"
            )
        seen |= g.touched


@dataclass(frozen=True)
class StepPermutation:
    """The invertible map on Z_{2^width} effected by one synchronous step.

    ``touched_partition`` groups bit indices by shared gate; the table must
    factorize over it (bits in different blocks cannot influence each other
    within the step).
    """

    width: int
    table: tuple[int, ...]
    touched_partition: tuple[frozenset[int], ...]

    def __post_init__(self):
        size = 1 << self.width
        if len(self.table) != size:
            raise ValidationError(
                f"table must have {size} entries for width {self.width}"
            )
        hit = [False] * size
        for v in self.table:
            if not 0 <= v < size or hit[v]:
                raise ValidationError("step table is not a bijection on Z_{2^N}")
            hit[v] = True
        covered: set[int] = set()
        for block in self.touched_partition:
            if covered & block:
                raise ValidationError("touched_partition blocks must be disjoint")
            covered |= block
        if covered != set(range(1, self.width + 1)):
            raise ValidationError("touched_partition must cover all bit indices")
        self._check_factorization()

    def _check_factorization(self) -> None:
        for block in self.touched_partition:
            mask = sum(1 << (i - 1) for i in block)
            seen: dict[int, int] = {}
            for v, out in enumerate(self.table):
                key = v & mask
                prev = seen.setdefault(key, out & mask)
                if prev != out & mask:
                    raise ValidationError(
                        f"table does not factorize over block {sorted(block)}"
                    )

    def __call__(self, v: int) -> int:
        return self.table[v]

    def apply(self, word: BitWord) -> BitWord:
        if word.width != self.width:
            raise ValidationError("word width does not match step width")
        return BitWord(self.table[word.value], self.width)

    def inverse(self) -> "StepPermutation":
        inv = [0] * len(self.table)
        for v, out in enumerate(self.table):
            inv[out] = v
        return StepPermutation(self.width, tuple(inv), self.touched_partition)

    @classmethod
    def identity(cls, width: int) -> "StepPermutation":
        blocks = tuple(frozenset({i}) for i in range(1, width + 1))
        return cls(width, tuple(range(1 << width)), blocks)

    @classmethod
    def from_table(cls, width: int, table: Sequence[int]) -> "StepPermutation":
        """A raw permutation with no locality structure (single block)."""
        return cls(width, tuple(table), (frozenset(range(1, width + 1)),))


def compose_step(gates: Sequence[Gate], width: int) -> StepPermutation:
    """Combine pairwise-disjoint gates into the step's permutation table."""
    _check_disjoint(gates, width)
    table = []
    for v in range(1 << width):
        out = v
        for g in gates:
            out = g.apply_to_value(out)
        table.append(out)
    idle = set(range(1, width + 1)) - {b for g in gates for b in g.bits}
    blocks = tuple(g.touched for g in gates) + tuple(frozenset({i}) for i in sorted(idle))
    return StepPermutation(width, tuple(table), blocks)


@dataclass(frozen=True)
class NetworkProgram:
    """An ordered sequence of synchronous steps on a fixed-width network."""

    width: int
    steps: tuple[tuple[Gate, ...], ...]

    def __post_init__(self):
        for step in self.steps:
            _check_disjoint(step, self.width)

    @property
    def num_steps(self) -> int:
        return len(self.steps)

    def step_permutations(self) -> list[StepPermutation]:
        return [compose_step(step, self.width) for step in self.steps]


def program(width: int, *steps: Iterable[Gate]) -> NetworkProgram:
    return NetworkProgram(width, tuple(tuple(s) for s in steps))


def run(prog: NetworkProgram, b0: BitWord) -> list[BitWord]:
    """Trajectory of one computer: one word per integer time, length steps+1."""
    if b0.width != prog.width:
        raise ValidationError("initial word width does not match program width")
    traj = [b0]
    for perm in prog.step_permutations():
        traj.append(perm.apply(traj[-1]))
    return traj


def info_cone(
    prog: NetworkProgram, start: Iterable[int], t0: int, t1: int
) -> frozenset[int]:
    """Bits that could carry information confined to ``start`` at time t0.

    Grows by one shared gate per step: a bit joins the cone at t+1 exactly
    when it passes through a gate together with a cone member during the
    (t+1)'th step. Structural, so a sound over-approximation of actual
    information flow.
    """
    cone = set(start)
    if any(b < 1 or b > prog.width for b in cone):
        raise ValidationError("cone seed contains out-of-range bit indices")
    if not 0 <= t0 <= t1 <= prog.num_steps:
        raise ValidationError(f"need 0 <= t0 <= t1 <= {prog.num_steps}")
    for step in prog.steps[t0:t1]:
        for g in step:
            if cone & g.touched:
                cone |= g.touched
    return frozenset(cone)


def canonicalize_under_subnetwork_permutation(
    word: BitWord, layout: Sequence[Sequence[int]]
) -> BitWord:
    """Canonical representative of a word under permutations of identical blocks.

    ``layout`` lists the bit indices of each sub-network block. Blocks must be
    disjoint and equally sized. The representative is the lexicographically
    least bit sequence (b_1, b_2, ...) over all ways of permuting the block
    contents across the block slots; two words denote the same physical state
    iff their representatives are equal.
    """
    blocks = [tuple(b) for b in layout]
    if not blocks:
        raise ValidationError("layout must contain at least one block")
    sizes = {len(b) for b in blocks}
    if len(sizes) != 1:
        raise ValidationError("blocks must all have the same size")
    flat = [i for b in blocks for i in b]
    if len(set(flat)) != len(flat):
        raise ValidationError("blocks must be disjoint")
    if any(i < 1 or i > word.width for i in flat):
        raise ValidationError("block indices out of range")

    contents = [tuple(word.bit(i) for i in block) for block in blocks]
    best: BitWord | None = None
    for perm in itertools.permutations(range(len(blocks))):
        bits = list(word.bits())
        for slot, src in enumerate(perm):
            for pos, i in enumerate(blocks[slot]):
                bits[i - 1] = contents[src][pos]
        cand = BitWord.from_bits(bits)
        if best is None or cand.bits() < best.bits():
            best = cand
    assert best is not None
    return best
