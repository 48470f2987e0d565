"""Ensembles of identical classical networks and their projector-basis algebra.

An ensemble assigns each initial word an exact rational multiplicity. Because
every computer in the ensemble runs the same program, the multiplicity
attached to a trajectory never changes; only the word it sits on moves.

The algebra represents observables of the ensemble as vectors over the basis
of word projectors at a fixed time: an e-number of width N at time t is a
formal sum sum_b c_b P_b(t) with rational coefficients. Evolution through a
step permutation f re-expresses the same abstract vector in the t+1 basis
(coefficients follow c'_b = c_{f^-1(b)}) and then applies f to the lifted
value, so the canonical state e-number sum_b b P_b(t) evolves to
sum_b f(b) P_b(t+1).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Callable, Mapping, Sequence, Union

from .classical import BitWord, NetworkProgram, StepPermutation, run
from .errors import TimeTagError, ValidationError

RationalLike = Union[int, Fraction, str]


def _as_fraction(x) -> Fraction:
    if isinstance(x, float):
        return Fraction(x)
    return Fraction(x)


@dataclass(frozen=True)
class Ensemble:
    """Finitely many identical networks, counted by word with exact weights."""

    width: int
    items: tuple[tuple[int, Fraction], ...]

    def __post_init__(self):
        size = 1 << self.width
        seen = set()
        for word, mult in self.items:
            if not 0 <= word < size:
                raise ValidationError(f"word {word} out of range for width {self.width}")
            if word in seen:
                raise ValidationError(f"word {word} listed twice")
            if mult <= 0:
                raise ValidationError("multiplicities must be positive")
            seen.add(word)
        if not self.items:
            raise ValidationError("ensemble must contain at least one computer")

    @classmethod
    def from_mapping(
        cls, width: int, multiplicities: Mapping[int, RationalLike]
    ) -> "Ensemble":
        items = tuple(
            sorted((int(w), _as_fraction(m)) for w, m in multiplicities.items() if m)
        )
        return cls(width, items)

    def multiplicity(self, word: int) -> Fraction:
        for w, m in self.items:
            if w == word:
                return m
        return Fraction(0)

    @property
    def total(self) -> Fraction:
        return sum((m for _, m in self.items), Fraction(0))

    def proportions(self) -> dict[int, Fraction]:
        total = self.total
        return {w: m / total for w, m in self.items}

    def support(self) -> tuple[int, ...]:
        return tuple(w for w, _ in self.items)


def evolve_multiplicities(ensemble: Ensemble, step: StepPermutation) -> Ensemble:
    """One synchronous step: the computers on word b all move to f(b)."""
    if step.width != ensemble.width:
        raise ValidationError("step width does not match ensemble width")
    return Ensemble.from_mapping(
        ensemble.width, {step(w): m for w, m in ensemble.items}
    )


@dataclass(frozen=True)
class Branch:
    """A maximal set of identical computers: one trajectory, one multiplicity."""

    trajectory: tuple[BitWord, ...]
    multiplicity: Fraction

    @property
    def start(self) -> BitWord:
        return self.trajectory[0]


def branches(ensemble: Ensemble, prog: NetworkProgram) -> list[Branch]:
    """Decompose an ensemble run into branches, ordered by initial word.

    Computers that start equal stay equal (the dynamics are deterministic), so
    each support word generates exactly one branch and its multiplicity is
    constant for the whole run.
    """
    if prog.width != ensemble.width:
        raise ValidationError("program width does not match ensemble width")
    out = []
    for word, mult in ensemble.items:
        traj = run(prog, BitWord(word, ensemble.width))
        out.append(Branch(tuple(traj), mult))
    return out


@dataclass(frozen=True)
class ENumber:
    """A rational vector over the word-projector basis at one time.

    Operations mixing different times or widths are rejected: the projector
    bases at distinct times are distinct bases, so such sums have no meaning
    until one side is re-expressed via ``retime``.
    """

    width: int
    time_tag: int
    coeffs: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.coeffs) != 1 << self.width:
            raise ValidationError(
                f"need {1 << self.width} coefficients for width {self.width}"
            )

    def _check_compatible(self, other: "ENumber") -> None:
        if self.width != other.width:
            raise ValidationError("e-number widths differ")
        if self.time_tag != other.time_tag:
            raise TimeTagError(
                f"time tags differ ({self.time_tag} vs {other.time_tag}); "
                "retime one operand first"
            )

    def __add__(self, other: "ENumber") -> "ENumber":
        self._check_compatible(other)
        return ENumber(
            self.width,
            self.time_tag,
            tuple(a + b for a, b in zip(self.coeffs, other.coeffs)),
        )

    def __sub__(self, other: "ENumber") -> "ENumber":
        self._check_compatible(other)
        return ENumber(
            self.width,
            self.time_tag,
            tuple(a - b for a, b in zip(self.coeffs, other.coeffs)),
        )

    def __neg__(self) -> "ENumber":
        return ENumber(self.width, self.time_tag, tuple(-a for a in self.coeffs))

    def __mul__(self, other):
        if isinstance(other, ENumber):
            return enumber_product(self, other)
        if isinstance(other, (int, Rational)):
            c = Fraction(other)
            return ENumber(self.width, self.time_tag, tuple(c * a for a in self.coeffs))
        return NotImplemented

    __rmul__ = __mul__

    def coefficient(self, word: int) -> Fraction:
        return self.coeffs[word]

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)


def zero_enumber(width: int, time_tag: int = 0) -> ENumber:
    return ENumber(width, time_tag, (Fraction(0),) * (1 << width))


def unit_enumber(width: int, time_tag: int = 0) -> ENumber:
    """The identity: every projector with coefficient one."""
    return ENumber(width, time_tag, (Fraction(1),) * (1 << width))


def basis_projector(width: int, word: int, time_tag: int = 0) -> ENumber:
    """P_b(t): the indicator of the network holding word b at time t."""
    if not 0 <= word < (1 << width):
        raise ValidationError(f"word {word} out of range for width {width}")
    coeffs = [Fraction(0)] * (1 << width)
    coeffs[word] = Fraction(1)
    return ENumber(width, time_tag, tuple(coeffs))


def state_enumber(width: int, time_tag: int = 0) -> ENumber:
    """b(t) = sum_b b P_b(t), the word observable itself."""
    return ENumber(width, time_tag, tuple(Fraction(v) for v in range(1 << width)))


def mu_enumber(ensemble: Ensemble, time_tag: int = 0) -> ENumber:
    """The multiplicity observable of an ensemble at a given time."""
    coeffs = [Fraction(0)] * (1 << ensemble.width)
    for w, m in ensemble.items:
        coeffs[w] = m
    return ENumber(ensemble.width, time_tag, tuple(coeffs))


def scalar_product(x: ENumber, y: ENumber) -> Fraction:
    """Componentwise contraction sum_b x_b y_b.

    The projector basis is orthonormal in this pairing: distinct projectors
    pair to zero and each pairs to one with itself.
    """
    x._check_compatible(y)
    return sum((a * b for a, b in zip(x.coeffs, y.coeffs)), Fraction(0))


def enumber_product(x: ENumber, y: ENumber) -> ENumber:
    """Componentwise product; projector idempotence and orthogonality follow."""
    x._check_compatible(y)
    return ENumber(
        x.width, x.time_tag, tuple(a * b for a, b in zip(x.coeffs, y.coeffs))
    )


def tensor(x: ENumber, y: ENumber) -> ENumber:
    """Algebra of a compound network; joint word index is a*2^N' + b.

    ``x`` describes the sub-network holding the high-order bits and ``y`` the
    one holding the low-order bits of the combined word.
    """
    if x.time_tag != y.time_tag:
        raise TimeTagError("tensor factors must carry the same time tag")
    size_y = 1 << y.width
    coeffs = [Fraction(0)] * (1 << (x.width + y.width))
    for a, ca in enumerate(x.coeffs):
        if ca == 0:
            continue
        for b, cb in enumerate(y.coeffs):
            coeffs[a * size_y + b] = ca * cb
    return ENumber(x.width + y.width, x.time_tag, tuple(coeffs))


def lift_function(g: Callable[[Fraction], RationalLike], x: ENumber) -> ENumber:
    """Apply a scalar function coefficientwise: g(sum c_b P_b) = sum g(c_b) P_b.

    Sound because the projectors are idempotent and mutually orthogonal, so
    polynomials act componentwise and any pointwise-defined g extends the
    same way.
    """
    return ENumber(
        x.width, x.time_tag, tuple(_as_fraction(g(c)) for c in x.coeffs)
    )


def retime(x: ENumber, step: StepPermutation) -> ENumber:
    """Re-express x in the projector basis one step later.

    P_b(t+1) is the same abstract projector as P_{f^-1(b)}(t), so the
    coefficient vector permutes: c'_b = c_{f^-1(b)}. The value is unchanged;
    only the basis label and the time tag move.
    """
    if step.width != x.width:
        raise ValidationError("step width does not match e-number width")
    inv = step.inverse()
    coeffs = tuple(x.coeffs[inv(b)] for b in range(1 << x.width))
    return ENumber(x.width, x.time_tag + 1, coeffs)


def evolve_enumber(x: ENumber, step: StepPermutation) -> ENumber:
    """Heisenberg-style law for the word observable: lift f after retiming.

    For the canonical state e-number b(t) this yields b(t+1) = f(b(t)); for a
    multiplicity e-number mu(t) the lift of f is not meaningful, use
    ``retime`` alone (multiplicities ride along with their branch).
    """
    moved = retime(x, step)
    return lift_function(lambda c: Fraction(step(int(c))), moved)


def reconstruct_projectors_from_algebra(
    word_numbers: Sequence[ENumber],
) -> list[list[ENumber]]:
    """Recover every P_b(t) from the word e-numbers b(t) alone.

    For each time t and word b, lifting the indicator v -> [v == b] through
    b(t) reproduces the projector, demonstrating that the word history as an
    algebra element carries the full branch structure.
    """
    out = []
    for x in word_numbers:
        row = []
        for b in range(1 << x.width):
            row.append(lift_function(lambda c, b=b: Fraction(1 if c == b else 0), x))
        out.append(row)
    return out
