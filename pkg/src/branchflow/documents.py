"""Circuit documents: a line-oriented description language, parser, printer.

The grammar, one directive per line (``#`` starts a comment):

    qubits N
    engines classical ensemble quantum
    init basis 0b011
    init ensemble 0b011:4 0b100:1/2 ...
    init state 0b011:(0.577,0) ...
    step toffoli 1 2 3 ; cnot 4 5 ; delay 2
    step phase 2 0.7853981633974483
    step unitary q=[1,2] rows=[[(re,im),...],...]
    step cond control=3 f=perm(0,2,1,3) U=rows=[[...]]
    analyze correspondence
    analyze autonomy selector=zN
    analyze robustness monitor=1,2
    analyze classicality

``qubits`` must come first; exactly one ``init`` is required. Bit and qubit
indices are 1-based with bit 1 the least significant. In ``unitary``, the
first listed qubit is the local least significant bit. ``cond``'s control
must be the top qubit (index N), and f/U act on qubits 1..N-1. Every parse
error carries a line and column and the offending token.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from .classical import GATE_ARITY
from .errors import ParseError

ENGINE_ORDER = ("classical", "ensemble", "quantum")
SELECTOR_NAMES = ("allz", "zN", "xN", "offN")
ANALYSIS_KINDS = ("correspondence", "autonomy", "robustness", "classicality")
UNITARY_TOL = 1e-9
NORM_TOL = 1e-9


class NormalizationWarning(UserWarning):
    """An amplitude list was not unit norm and has been normalized."""


@dataclass(frozen=True)
class BasisInit:
    word: int


@dataclass(frozen=True)
class EnsembleInit:
    items: tuple[tuple[int, Fraction], ...]


@dataclass(frozen=True)
class StateInit:
    items: tuple[tuple[int, complex], ...]


InitSpec = Union[BasisInit, EnsembleInit, StateInit]


@dataclass(frozen=True)
class GateItem:
    kind: str
    bits: tuple[int, ...]


@dataclass(frozen=True)
class PhaseItem:
    qubit: int
    phase: float


@dataclass(frozen=True)
class UnitaryItem:
    qubits: tuple[int, ...]
    rows: tuple[tuple[complex, ...], ...]


@dataclass(frozen=True)
class CondItem:
    control: int
    f_table: tuple[int, ...]
    rows: tuple[tuple[complex, ...], ...]


StepItem = Union[GateItem, PhaseItem, UnitaryItem, CondItem]


@dataclass(frozen=True)
class AnalysisRequest:
    kind: str
    selector: Optional[str] = None
    monitor: tuple[int, ...] = ()


@dataclass(frozen=True)
class CircuitDocument:
    width: int
    engines: tuple[str, ...]
    init: InitSpec
    steps: tuple[tuple[StepItem, ...], ...]
    analyses: tuple[AnalysisRequest, ...]


# ---------------------------------------------------------------------------
# Tokenizing


@dataclass(frozen=True)
class _Field:
    text: str
    line: int
    column: int


def _split_fields(text: str, line_no: int) -> list[_Field]:
    """Split a line on whitespace, keeping bracketed groups together."""
    fields = []
    i = 0
    n = len(text)
    while i < n:
        if text[i].isspace():
            i += 1
            continue
        if text[i] == "#":
            break
        if text[i] == ";":
            fields.append(_Field(";", line_no, i + 1))
            i += 1
            continue
        start = i
        depth = 0
        while i < n:
            c = text[i]
            if (c == "#" or c == ";") and depth == 0:
                break
            if c in "([":
                depth += 1
            elif c in ")]":
                depth -= 1
                if depth < 0:
                    raise ParseError(
                        "unbalanced bracket", line_no, i + 1, c
                    )
            elif c.isspace() and depth == 0:
                break
            i += 1
        if depth > 0:
            raise ParseError(
                "unclosed bracket", line_no, start + 1, text[start:i]
            )
        fields.append(_Field(text[start:i], line_no, start + 1))
    return fields


def _err(f: _Field, message: str, offset: int = 0, token: Optional[str] = None) -> ParseError:
    return ParseError(
        message, f.line, f.column + offset, f.text if token is None else token
    )


# ---------------------------------------------------------------------------
# Scalar parsers


def _parse_int(f: _Field, what: str = "integer") -> int:
    try:
        return int(f.text)
    except ValueError:
        raise _err(f, f"expected {what}") from None


def _parse_word_literal(f: _Field, width: int) -> int:
    try:
        value = int(f.text, 0)
    except ValueError:
        raise _err(f, "expected a word literal (binary 0b..., decimal, or hex)") from None
    if not 0 <= value < 1 << width:
        raise _err(f, f"word out of range for {width} bit(s)")
    return value


def _parse_fraction(f: _Field, text: str, offset: int) -> Fraction:
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise _err(f, "expected a rational multiplicity", offset, text) from None
    if value <= 0:
        raise _err(f, "multiplicity must be positive", offset, text)
    return value


class _Cursor:
    """Character cursor over one field, for bracketed sub-grammars."""

    def __init__(self, f: _Field, text: str, offset: int):
        self.field = f
        self.text = text
        self.offset = offset
        self.pos = 0

    def error(self, message: str) -> ParseError:
        tok = self.text[self.pos : self.pos + 12] or "<end>"
        return _err(self.field, message, self.offset + self.pos, tok)

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, c: str) -> None:
        if self.peek() != c:
            raise self.error(f"expected {c!r}")
        self.pos += 1

    def at_end(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.text)

    def read_number(self) -> float:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos] not in ",()[]":
            self.pos += 1
        raw = self.text[start : self.pos].strip()
        try:
            return float(raw)
        except ValueError:
            self.pos = start
            raise self.error("expected a number") from None


def _parse_complex_entry(cur: _Cursor) -> complex:
    if cur.peek() == "(":
        cur.expect("(")
        re = cur.read_number()
        cur.expect(",")
        im = cur.read_number()
        cur.expect(")")
        return complex(re, im)
    return complex(cur.read_number(), 0.0)


def _parse_matrix(f: _Field, text: str, offset: int) -> tuple[tuple[complex, ...], ...]:
    cur = _Cursor(f, text, offset)
    cur.expect("[")
    rows = []
    while True:
        cur.expect("[")
        row = [_parse_complex_entry(cur)]
        while cur.peek() == ",":
            cur.expect(",")
            row.append(_parse_complex_entry(cur))
        cur.expect("]")
        rows.append(tuple(row))
        if cur.peek() == ",":
            cur.expect(",")
            continue
        break
    cur.expect("]")
    if not cur.at_end():
        raise cur.error("trailing characters after matrix")
    width = len(rows[0])
    if any(len(r) != width for r in rows) or len(rows) != width:
        raise _err(f, f"matrix must be square, got {len(rows)} row(s)", offset)
    return tuple(rows)


def _check_unitary_rows(
    f: _Field, rows: tuple[tuple[complex, ...], ...], offset: int
) -> None:
    m = np.array(rows, dtype=complex)
    drift = float(np.abs(m.conj().T @ m - np.eye(m.shape[0])).max())
    if drift > UNITARY_TOL:
        raise _err(f, f"matrix is not unitary (deviation {drift:.2e})", offset)


def _parse_int_list(f: _Field, text: str, offset: int, close: str) -> tuple[int, ...]:
    cur = _Cursor(f, text, offset)
    cur.expect(close[0])
    values = []
    while True:
        cur.skip_ws()
        start = cur.pos
        while cur.pos < len(cur.text) and cur.text[cur.pos] not in ",()[]":
            cur.pos += 1
        raw = cur.text[start : cur.pos].strip()
        try:
            values.append(int(raw))
        except ValueError:
            cur.pos = start
            raise cur.error("expected an integer") from None
        if cur.peek() == ",":
            cur.expect(",")
            continue
        break
    cur.expect(close[1])
    if not cur.at_end():
        raise cur.error("trailing characters after list")
    return tuple(values)


def _keyed(f: _Field, key: str) -> tuple[str, int]:
    prefix = key + "="
    if not f.text.startswith(prefix):
        raise _err(f, f"expected {prefix}...")
    return f.text[len(prefix) :], len(prefix)


# ---------------------------------------------------------------------------
# Directive parsers


def _parse_gate_item(fields: list[_Field]) -> StepItem:
    head = fields[0]
    kind = head.text
    if kind == "phase":
        if len(fields) != 3:
            raise _err(head, "phase takes a qubit index and an angle")
        qubit = _parse_int(fields[1], "qubit index")
        try:
            angle = float(fields[2].text)
        except ValueError:
            raise _err(fields[2], "expected an angle in radians") from None
        if qubit < 1:
            raise _err(fields[1], "qubit indices are 1-based")
        return PhaseItem(qubit, angle)
    arity = GATE_ARITY[kind]
    if len(fields) != 1 + arity:
        raise _err(head, f"{kind} takes {arity} bit index(es), got {len(fields) - 1}")
    bits = tuple(_parse_int(f, "bit index") for f in fields[1:])
    seen: set[int] = set()
    for f, b in zip(fields[1:], bits):
        if b < 1:
            raise _err(f, "bit indices are 1-based")
        if b in seen:
            raise _err(f, f"{kind} bit indices must be distinct")
        seen.add(b)
    return GateItem(kind, bits)


def _parse_unitary_item(fields: list[_Field], width: int) -> UnitaryItem:
    head = fields[0]
    if len(fields) != 3:
        raise _err(head, "unitary takes q=[...] and rows=[[...]]")
    qtext, qoff = _keyed(fields[1], "q")
    qubits = _parse_int_list(fields[1], qtext, qoff, "[]")
    if len(set(qubits)) != len(qubits):
        raise _err(fields[1], "qubit list has repeats")
    if any(not 1 <= q <= width for q in qubits):
        raise _err(fields[1], f"qubit out of range 1..{width}")
    rtext, roff = _keyed(fields[2], "rows")
    rows = _parse_matrix(fields[2], rtext, roff)
    if len(rows) != 1 << len(qubits):
        raise _err(
            fields[2],
            f"matrix must be {1 << len(qubits)}x{1 << len(qubits)} for {len(qubits)} qubit(s)",
            roff,
        )
    _check_unitary_rows(fields[2], rows, roff)
    return UnitaryItem(qubits, rows)


def _parse_cond_item(fields: list[_Field], width: int) -> CondItem:
    head = fields[0]
    if len(fields) != 4:
        raise _err(head, "cond takes control=N f=perm(...) U=rows=[[...]]")
    ctext, coff = _keyed(fields[1], "control")
    try:
        control = int(ctext)
    except ValueError:
        raise _err(fields[1], "expected an integer control index", coff, ctext) from None
    if control != width:
        raise _err(
            fields[1],
            f"the control must be the top qubit {width}",
            coff,
            ctext,
        )
    ftext, foff = _keyed(fields[2], "f")
    if not ftext.startswith("perm(") or not ftext.endswith(")"):
        raise _err(fields[2], "expected f=perm(...)", foff, ftext)
    table = _parse_int_list(fields[2], ftext[4:], foff + 4, "()")
    half = 1 << (width - 1)
    if sorted(table) != list(range(half)):
        raise _err(
            fields[2],
            f"f must be a bijection on 0..{half - 1}",
            foff,
            ftext,
        )
    utext, uoff = _keyed(fields[3], "U")
    rtext, roff = _keyed(_Field(utext, fields[3].line, fields[3].column + uoff), "rows")
    rows = _parse_matrix(fields[3], rtext, uoff + roff)
    if len(rows) != half:
        raise _err(fields[3], f"U must be {half}x{half} for width {width}", uoff)
    _check_unitary_rows(fields[3], rows, uoff + roff)
    return CondItem(control, table, rows)


def _item_span(item: StepItem, width: int, group: list[_Field]) -> frozenset[int]:
    if isinstance(item, GateItem):
        for pos, b in enumerate(item.bits):
            if b > width:
                raise _err(group[1 + pos], f"bit index out of range 1..{width}")
        return frozenset(item.bits)
    if isinstance(item, PhaseItem):
        if item.qubit > width:
            raise _err(group[1], f"qubit index out of range 1..{width}")
        return frozenset({item.qubit})
    if isinstance(item, UnitaryItem):
        return frozenset(item.qubits)
    return frozenset(range(1, width + 1))


def _parse_step(fields: list[_Field], width: int) -> tuple[StepItem, ...]:
    groups: list[list[_Field]] = [[]]
    for f in fields:
        if f.text == ";":
            if not groups[-1]:
                raise _err(f, "empty step item before ';'")
            groups.append([])
        else:
            groups[-1].append(f)
    if not groups[-1]:
        last = fields[-1] if fields else None
        raise ParseError(
            "empty step item",
            last.line if last else 1,
            last.column if last else 1,
            ";",
        )
    items = []
    spans: set[int] = set()
    for group in groups:
        head = group[0]
        if head.text in GATE_ARITY or head.text == "phase":
            item = _parse_gate_item(group)
        elif head.text == "unitary":
            item = _parse_unitary_item(group, width)
        elif head.text == "cond":
            item = _parse_cond_item(group, width)
        else:
            raise _err(head, "unknown step item")
        span = _item_span(item, width, group)
        if spans & span:
            raise _err(
                head,
                f"step items must use disjoint bits; {sorted(spans & span)} repeated",
            )
        spans |= span
        items.append(item)
    return tuple(items)


def _parse_init(fields: list[_Field], width: int) -> InitSpec:
    head = fields[0]
    if len(fields) < 2:
        raise _err(head, "init needs a form: basis, ensemble, or state")
    form = fields[1]
    if form.text == "basis":
        if len(fields) != 3:
            raise _err(form, "init basis takes one word")
        return BasisInit(_parse_word_literal(fields[2], width))
    if form.text == "ensemble":
        if len(fields) < 3:
            raise _err(form, "init ensemble needs word:multiplicity entries")
        items: dict[int, Fraction] = {}
        for f in fields[2:]:
            if ":" not in f.text:
                raise _err(f, "expected word:multiplicity")
            wtext, mtext = f.text.split(":", 1)
            word = _parse_word_literal(_Field(wtext, f.line, f.column), width)
            mult = _parse_fraction(f, mtext, len(wtext) + 1)
            if word in items:
                raise _err(f, "word listed twice")
            items[word] = mult
        return EnsembleInit(tuple(sorted(items.items())))
    if form.text == "state":
        if len(fields) < 3:
            raise _err(form, "init state needs word:(re,im) entries")
        amps: dict[int, complex] = {}
        for f in fields[2:]:
            if ":" not in f.text:
                raise _err(f, "expected word:(re,im)")
            wtext, atext = f.text.split(":", 1)
            word = _parse_word_literal(_Field(wtext, f.line, f.column), width)
            cur = _Cursor(f, atext, len(wtext) + 1)
            amp = _parse_complex_entry(cur)
            if not cur.at_end():
                raise cur.error("trailing characters after amplitude")
            if word in amps:
                raise _err(f, "word listed twice")
            amps[word] = amp
        norm = float(np.sqrt(sum(abs(a) ** 2 for a in amps.values())))
        if norm == 0.0:
            raise _err(head, "state amplitudes are all zero")
        if abs(norm - 1.0) > NORM_TOL:
            warnings.warn(
                f"state norm {norm!r} is not 1; normalizing", NormalizationWarning
            )
            amps = {w: a / norm for w, a in amps.items()}
        return StateInit(tuple(sorted(amps.items())))
    raise _err(form, "unknown init form (expected basis, ensemble, or state)")


def _parse_analysis(fields: list[_Field]) -> AnalysisRequest:
    head = fields[0]
    if len(fields) < 2:
        raise _err(head, "analyze needs a kind")
    kind = fields[1]
    if kind.text not in ANALYSIS_KINDS:
        raise _err(kind, f"unknown analysis (expected one of {', '.join(ANALYSIS_KINDS)})")
    if kind.text == "autonomy":
        if len(fields) != 3:
            raise _err(kind, "autonomy takes selector=...")
        stext, soff = _keyed(fields[2], "selector")
        if stext not in SELECTOR_NAMES:
            raise _err(
                fields[2],
                f"unknown selector (expected one of {', '.join(SELECTOR_NAMES)})",
                soff,
                stext,
            )
        return AnalysisRequest("autonomy", selector=stext)
    if kind.text == "robustness":
        if len(fields) != 3:
            raise _err(kind, "robustness takes monitor=...")
        mtext, moff = _keyed(fields[2], "monitor")
        cur = _Cursor(fields[2], mtext, moff)
        qubits = []
        while True:
            cur.skip_ws()
            start = cur.pos
            while cur.pos < len(cur.text) and cur.text[cur.pos] not in ",":
                cur.pos += 1
            raw = cur.text[start : cur.pos].strip()
            try:
                qubits.append(int(raw))
            except ValueError:
                cur.pos = start
                raise cur.error("expected a qubit index") from None
            if cur.peek() == ",":
                cur.expect(",")
                continue
            break
        if len(set(qubits)) != len(qubits):
            raise _err(fields[2], "monitor list has repeats", moff, mtext)
        return AnalysisRequest("robustness", monitor=tuple(sorted(qubits)))
    if len(fields) != 2:
        raise _err(kind, f"{kind.text} takes no arguments")
    return AnalysisRequest(kind.text)


def parse(text: str) -> CircuitDocument:
    """Parse a circuit document; every raised error carries line and column."""
    width: Optional[int] = None
    engines: tuple[str, ...] = ()
    engines_seen = False
    init: Optional[InitSpec] = None
    steps: list[tuple[StepItem, ...]] = []
    analyses: list[AnalysisRequest] = []
    last_line = 0

    for line_no, raw in enumerate(text.splitlines(), start=1):
        last_line = line_no
        fields = _split_fields(raw, line_no)
        if not fields:
            continue
        head = fields[0]
        if width is None and head.text != "qubits":
            raise _err(head, "the document must start with a qubits line")
        if head.text == "qubits":
            if width is not None:
                raise _err(head, "duplicate qubits line")
            if len(fields) != 2:
                raise _err(head, "qubits takes one integer")
            width = _parse_int(fields[1], "a positive width")
            if width < 1:
                raise _err(fields[1], "width must be at least 1")
        elif head.text == "engines":
            if engines_seen:
                raise _err(head, "duplicate engines line")
            if len(fields) < 2:
                raise _err(head, "engines needs at least one name")
            names = set()
            for f in fields[1:]:
                if f.text not in ENGINE_ORDER:
                    raise _err(f, f"unknown engine (expected one of {', '.join(ENGINE_ORDER)})")
                names.add(f.text)
            engines = tuple(e for e in ENGINE_ORDER if e in names)
            engines_seen = True
        elif head.text == "init":
            if init is not None:
                raise _err(head, "duplicate init line")
            init = _parse_init(fields, width)
        elif head.text == "step":
            if len(fields) < 2:
                raise _err(head, "empty step")
            steps.append(_parse_step(fields[1:], width))
        elif head.text == "analyze":
            analyses.append(_parse_analysis(fields))
        else:
            raise _err(head, "unknown directive")

    if width is None:
        raise ParseError("empty document: missing qubits line", max(last_line, 1), 1, "<eof>")
    if init is None:
        raise ParseError("document has no init line", max(last_line, 1), 1, "<eof>")
    return CircuitDocument(width, engines, init, tuple(steps), tuple(analyses))


# ---------------------------------------------------------------------------
# Pretty-printing


def _word_literal(word: int, width: int) -> str:
    return "0b" + format(word, f"0{width}b")


def _complex_literal(z: complex) -> str:
    return f"({z.real!r},{z.imag!r})"


def _matrix_literal(rows: Sequence[Sequence[complex]]) -> str:
    return (
        "["
        + ",".join("[" + ",".join(_complex_literal(z) for z in row) + "]" for row in rows)
        + "]"
    )


def _item_literal(item: StepItem) -> str:
    if isinstance(item, GateItem):
        return " ".join([item.kind, *map(str, item.bits)])
    if isinstance(item, PhaseItem):
        return f"phase {item.qubit} {item.phase!r}"
    if isinstance(item, UnitaryItem):
        qlist = ",".join(map(str, item.qubits))
        return f"unitary q=[{qlist}] rows={_matrix_literal(item.rows)}"
    flist = ",".join(map(str, item.f_table))
    return (
        f"cond control={item.control} f=perm({flist}) "
        f"U=rows={_matrix_literal(item.rows)}"
    )


def render(doc: CircuitDocument) -> str:
    """Canonical text for a document; parse(render(doc)) == doc."""
    lines = [f"qubits {doc.width}"]
    if doc.engines:
        lines.append("engines " + " ".join(doc.engines))
    if isinstance(doc.init, BasisInit):
        lines.append(f"init basis {_word_literal(doc.init.word, doc.width)}")
    elif isinstance(doc.init, EnsembleInit):
        parts = [
            f"{_word_literal(w, doc.width)}:{m}" for w, m in doc.init.items
        ]
        lines.append("init ensemble " + " ".join(parts))
    else:
        parts = [
            f"{_word_literal(w, doc.width)}:{_complex_literal(a)}"
            for w, a in doc.init.items
        ]
        lines.append("init state " + " ".join(parts))
    for step in doc.steps:
        lines.append("step " + " ; ".join(_item_literal(item) for item in step))
    for a in doc.analyses:
        if a.kind == "autonomy":
            lines.append(f"analyze autonomy selector={a.selector}")
        elif a.kind == "robustness":
            lines.append("analyze robustness monitor=" + ",".join(map(str, a.monitor)))
        else:
            lines.append(f"analyze {a.kind}")
    return "\n".join(lines) + "\n"
