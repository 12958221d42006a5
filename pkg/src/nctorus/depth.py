"""A small prefix machine with exhaustive program search.

Programs are bit strings (``str`` of ``'0'``/``'1'``).  A two-bit opcode is
followed by Elias-gamma fields:

* ``00`` LIT ``gamma(l) w``: output the ``l`` bits ``w``.
* ``01`` REP ``gamma(c) gamma(l) w``: output ``w`` repeated ``c`` times.
* ``10`` CA ``r gamma(g) gamma(l) w``: run the elementary cellular automaton
  with 8-bit rule ``r`` for ``g`` generations on the cyclic tape ``w``.
* ``11``: never halts.

The step count is the output work (``l``, ``c*l`` or ``g*l``) plus the
program length.  A program with missing or trailing bits never halts, which
makes the halting set prefix-free.  The machine is not universal, so every
complexity and depth figure here is relative to it ("toy-machine depth").
"""
from __future__ import annotations

import enum
import functools
import itertools
import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterator, Optional, Sequence

FORMAT_VERSION = 1
MAX_PROGRAM_LENGTH = 26
DEPTH_LABEL = "toy-machine depth"

LIT, REP, CA = "00", "01", "10"


class Status(str, enum.Enum):
    HALTED = "halted"
    BUDGET_EXCEEDED = "budget_exceeded"
    DIVERGES = "diverges_by_construction"


@dataclass(frozen=True)
class RunResult:
    status: Status
    output: Optional[str]
    steps: int
    output_length: Optional[int] = None

    @property
    def halted(self) -> bool:
        return self.status is Status.HALTED


def gamma(n: int) -> str:
    if n < 1:
        raise ValueError("Elias gamma codes positive integers only")
    b = format(n, "b")
    return "0" * (len(b) - 1) + b


def _gamma_len(n: int) -> int:
    return 2 * n.bit_length() - 1


def _read_gamma(bits: str, pos: int) -> tuple[Optional[int], int]:
    zeros = 0
    while pos + zeros < len(bits) and bits[pos + zeros] == "0":
        zeros += 1
    end = pos + 2 * zeros + 1
    if end > len(bits):
        return None, len(bits)
    return int(bits[pos + zeros:end], 2), end


def ca_evolve(rule: int, tape: str, generations: int) -> str:
    """Cyclic elementary CA: new cell = bit ``4 L + 2 S + R`` of ``rule``."""
    n = len(tape)
    mask = (1 << n) - 1
    t = int(tape, 2)
    patterns = [p for p in range(8) if rule >> p & 1]
    for _ in range(generations):
        left = (t >> 1) | ((t & 1) << (n - 1))
        right = ((t << 1) & mask) | (t >> (n - 1))
        new = 0
        for p in patterns:
            new |= (left if p & 4 else ~left) & (t if p & 2 else ~t) & (right if p & 1 else ~right)
        t = new & mask
    return format(t, f"0{n}b")


@dataclass(frozen=True)
class _Header:
    op: str
    end: int
    work: int
    output_length: int
    fields: tuple


def _parse(program: str) -> Optional[_Header]:
    """Decode every field; ``None`` if the program is malformed or incomplete."""
    op = program[:2]
    if len(op) < 2 or op == "11":
        return None
    pos = 2
    if op == CA:
        if len(program) < pos + 8:
            return None
        rule = int(program[pos:pos + 8], 2)
        pos += 8
    counts = []
    for _ in range({LIT: 0, REP: 1, CA: 1}[op]):
        value, pos = _read_gamma(program, pos)
        if value is None:
            return None
        counts.append(value)
    length, pos = _read_gamma(program, pos)
    if length is None or pos + length > len(program):
        return None
    w = program[pos:pos + length]
    end = pos + length
    if op == LIT:
        return _Header(op, end, length, length, (w,))
    if op == REP:
        return _Header(op, end, counts[0] * length, counts[0] * length, (counts[0], w))
    return _Header(op, end, counts[0] * length, length, (rule, counts[0], w))


def _execute(header: _Header) -> str:
    if header.op == LIT:
        return header.fields[0]
    if header.op == REP:
        c, w = header.fields
        return w * c
    rule, g, w = header.fields
    return ca_evolve(rule, w, g)


def run(program: str, T_max: int) -> RunResult:
    """Execute ``program`` under a step budget."""
    if any(ch not in "01" for ch in program):
        raise ValueError("programs are strings over '0' and '1'")
    header = _parse(program)
    if header is None or header.end != len(program):
        return RunResult(Status.DIVERGES, None, 0)
    steps = header.work + len(program)
    if steps > T_max:
        return RunResult(Status.BUDGET_EXCEEDED, None, steps, header.output_length)
    output = _execute(header)
    return RunResult(Status.HALTED, output, steps, len(output))


def literal_program(x: str) -> str:
    return LIT + gamma(len(x)) + x


def _bitstrings(n: int) -> Iterator[str]:
    if n == 0:
        yield ""
        return
    for v in range(1 << n):
        yield format(v, f"0{n}b")


def complete_programs(L_max: int) -> list[str]:
    """Every syntactically complete program of length ``<= L_max``, length-then-lex ordered."""
    out = []
    for l in itertools.count(1):
        if 2 + _gamma_len(l) + l > L_max:
            break
        # LIT
        head = LIT + gamma(l)
        out.extend(head + w for w in _bitstrings(l))
        # REP
        for c in itertools.count(1):
            if 2 + _gamma_len(c) + _gamma_len(l) + l > L_max:
                break
            head = REP + gamma(c) + gamma(l)
            out.extend(head + w for w in _bitstrings(l))
        # CA
        for g in itertools.count(1):
            if 10 + _gamma_len(g) + _gamma_len(l) + l > L_max:
                break
            tail = gamma(g) + gamma(l)
            for rule in range(256):
                head = CA + format(rule, "08b") + tail
                out.extend(head + w for w in _bitstrings(l))
    out.sort(key=lambda p: (len(p), p))
    return out


@dataclass(frozen=True)
class Record:
    program: str
    status: Status
    steps: int
    output: Optional[str]
    output_length: int


class ProgramTable:
    """Results of running every complete program up to ``L_max`` bits under ``T_max``."""

    def __init__(self, L_max: int, T_max: int, records: Sequence[Record]):
        self.L_max = L_max
        self.T_max = T_max
        self.records = sorted(records, key=lambda r: (len(r.program), r.program))
        self.producers: dict[str, list[Record]] = defaultdict(list)
        self.pending: dict[int, list[Record]] = defaultdict(list)
        for r in self.records:
            if r.status is Status.HALTED:
                self.producers[r.output].append(r)
            else:
                self.pending[r.output_length].append(r)

    @classmethod
    def build(cls, L_max: int, T_max: int) -> "ProgramTable":
        if L_max > MAX_PROGRAM_LENGTH:
            raise ValueError(f"L_max is limited to {MAX_PROGRAM_LENGTH}")
        records = []
        for p in complete_programs(L_max):
            res = run(p, T_max)
            records.append(Record(p, res.status, res.steps, res.output, res.output_length))
        return cls(L_max, T_max, records)

    def halting_programs(self) -> list[str]:
        return [r.program for r in self.records if r.status is Status.HALTED]

    def first_pending(self, n: int) -> Optional[Record]:
        rows = self.pending.get(n)
        return rows[0] if rows else None

    def key(self) -> tuple[int, int, int]:
        return FORMAT_VERSION, self.L_max, self.T_max


@functools.lru_cache(maxsize=8)
def program_table(L_max: int, T_max: int) -> ProgramTable:
    return ProgramTable.build(L_max, T_max)


def _table(L_max: int, T_max: int, table: Optional[ProgramTable]) -> ProgramTable:
    if table is None:
        return program_table(L_max, T_max)
    if (table.L_max, table.T_max) != (L_max, T_max):
        raise ValueError("table budgets do not match the request")
    return table


@dataclass(frozen=True)
class CanonicalProgram:
    """Outcome of the search for the first program printing ``x``.

    ``program`` is ``None`` when nothing within the budget was seen to print
    ``x``.  ``K_lower``/``K_upper`` bound the program-size complexity; the
    upper bound falls back to the literal program.  ``exact`` means no
    over-budget program earlier in the order could have printed ``x``.
    """

    x: str
    program: Optional[str]
    K_lower: int
    K_upper: int
    exact: bool

    @property
    def found(self) -> bool:
        return self.program is not None

    @property
    def K(self) -> Optional[int]:
        return self.K_upper if self.K_lower == self.K_upper else None


def canonical_program(x: str, L_max: int, T_max: int, table: Optional[ProgramTable] = None) -> CanonicalProgram:
    table = _table(L_max, T_max, table)
    producers = table.producers.get(x)
    first = producers[0].program if producers else None
    pend = table.first_pending(len(x))
    order = lambda p: (len(p), p)  # noqa: E731
    exact = first is not None and (pend is None or order(pend.program) > order(first))
    K_upper = min(len(first) if first else math.inf, len(literal_program(x)))
    K_lower = min(
        len(first) if first else math.inf,
        len(pend.program) if pend else math.inf,
        L_max + 1,
    )
    return CanonicalProgram(x, first, int(K_lower), int(K_upper), exact)


class Certainty(str, enum.Enum):
    CERTAIN = "certain"
    CONSERVATIVE = "budget-conservative"


@dataclass(frozen=True)
class IncompressibilityStatus:
    value: bool
    certainty: Certainty

    def __bool__(self) -> bool:
        return self.value


def incompressibility(y: str, s: int, L_max: int, T_max: int, table: Optional[ProgramTable] = None) -> IncompressibilityStatus:
    """Decide ``K(y) > |y| - s``; undecided cases use the upper bound on ``K``."""
    cp = canonical_program(y, L_max, T_max, table)
    bound = len(y) - s
    if cp.K_lower > bound:
        return IncompressibilityStatus(True, Certainty.CERTAIN)
    if cp.K_upper <= bound:
        return IncompressibilityStatus(False, Certainty.CERTAIN)
    return IncompressibilityStatus(cp.K_upper > bound, Certainty.CONSERVATIVE)


def is_s_incompressible(y: str, s: int, L_max: int, T_max: int, table: Optional[ProgramTable] = None) -> bool:
    return incompressibility(y, s, L_max, T_max, table).value


@dataclass(frozen=True)
class DepthBracket:
    """``lower <= D_s(x) <= upper``; ``upper`` is ``None`` when unknown within budget."""

    x: str
    s: int
    lower: int
    upper: Optional[int]
    L_max: int
    T_max: int
    witness: Optional[str] = None
    label: str = DEPTH_LABEL

    def __post_init__(self):
        if self.upper is not None and self.lower > self.upper:
            raise ValueError(f"empty bracket [{self.lower}, {self.upper}]")

    @property
    def exact(self) -> bool:
        return self.upper is not None and self.lower == self.upper

    def contains(self, value: int) -> bool:
        return self.lower <= value and (self.upper is None or value <= self.upper)

    def to_dict(self) -> dict:
        return {
            "string": self.x,
            "significance": self.s,
            "lower": self.lower,
            "upper": self.upper if self.upper is not None else "unknown",
            "exact": self.exact,
            "witness": self.witness,
            "max_prog_len": self.L_max,
            "budget": self.T_max,
            "label": self.label,
        }


def logical_depth(x: str, s: int, L_max: int, T_max: int, table: Optional[ProgramTable] = None) -> DepthBracket:
    """Bracket the least running time of an ``s``-incompressible program printing ``x``.

    Upper bound: producers known to be ``s``-incompressible.  Lower bound:
    producers not known to be compressible, over-budget programs whose
    output has the right length (their step count is known), and
    ``|x| + L_max + 1``, since every longer program spends at least
    ``|x| + |y|`` steps.
    """
    table = _table(L_max, T_max, table)
    upper: Optional[int] = None
    witness = None
    lower = len(x) + L_max + 1
    for r in table.producers.get(x, ()):
        status = incompressibility(r.program, s, L_max, T_max, table)
        if not status.value and status.certainty is Certainty.CERTAIN:
            continue
        lower = min(lower, r.steps)
        if status.certainty is Certainty.CERTAIN and (upper is None or r.steps < upper):
            upper, witness = r.steps, r.program
    for r in table.pending.get(len(x), ()):
        lower = min(lower, r.steps)
    return DepthBracket(x, s, lower, upper, L_max, T_max, witness)


# ---------------------------------------------------------------- qubit strings


def _gaussian(z) -> tuple[Fraction, Fraction]:
    if isinstance(z, complex):
        raise TypeError("amplitudes must be exact rationals, not floats")
    if isinstance(z, tuple):
        re, im = z
    else:
        re, im = z, 0
    if isinstance(re, float) or isinstance(im, float):
        raise TypeError("amplitudes must be exact rationals, not floats")
    return Fraction(re), Fraction(im)


def _encode_rational(q: Fraction) -> str:
    return ("1" if q < 0 else "0") + gamma(abs(q.numerator) + 1) + gamma(q.denominator)


def encode_qubit_string(amplitudes: Sequence) -> str:
    """Bit string for an ``n``-qubit state with Gaussian-rational amplitudes.

    Layout: ``gamma(n + 1)``, then for every amplitude its real and then its
    imaginary part as sign bit, ``gamma(|numerator| + 1)``, ``gamma(denominator)``.
    """
    amps = [_gaussian(z) for z in amplitudes]
    n = len(amps).bit_length() - 1
    if not amps or 1 << n != len(amps):
        raise ValueError("the number of amplitudes must be a power of two")
    if sum(re * re + im * im for re, im in amps) != 1:
        raise ValueError("amplitudes are not normalized")
    return gamma(n + 1) + "".join(_encode_rational(re) + _encode_rational(im) for re, im in amps)


def decode_qubit_string(bits: str) -> list[tuple[Fraction, Fraction]]:
    n1, pos = _read_gamma(bits, 0)
    if n1 is None:
        raise ValueError("truncated qubit encoding")

    def rational(pos: int) -> tuple[Fraction, int]:
        if pos >= len(bits):
            raise ValueError("truncated qubit encoding")
        sign = bits[pos] == "1"
        num, pos = _read_gamma(bits, pos + 1)
        den, pos2 = _read_gamma(bits, pos) if num is not None else (None, pos)
        if num is None or den is None:
            raise ValueError("truncated qubit encoding")
        q = Fraction(num - 1, den)
        return (-q if sign else q), pos2

    amps = []
    for _ in range(1 << (n1 - 1)):
        re, pos = rational(pos)
        im, pos = rational(pos)
        amps.append((re, im))
    if pos != len(bits):
        raise ValueError("trailing bits after qubit encoding")
    return amps


# ---------------------------------------------------------------- cache file


def _hex(bits: Optional[str]) -> str:
    if not bits:
        return "-"
    return format(int(bits, 2), "x")


def _unhex(text: str, length: int) -> str:
    return "" if text == "-" else format(int(text, 16), f"0{length}b")


def write_cache(path: str | Path, table: ProgramTable) -> None:
    """One tab-separated record per program: hex program, length, status, steps, hex output, output length."""
    lines = [f"# nctorus-depth-cache\tformat={FORMAT_VERSION}\tL_max={table.L_max}\tT_max={table.T_max}"]
    for r in table.records:
        out_len = r.output_length if r.output_length is not None else -1
        lines.append(
            f"{_hex(r.program)}\t{len(r.program)}\t{r.status.value}\t{r.steps}\t{_hex(r.output)}\t{out_len}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


def read_cache(path: str | Path) -> ProgramTable:
    lines = Path(path).read_text().splitlines()
    if not lines or not lines[0].startswith("# nctorus-depth-cache"):
        raise ValueError("not a depth cache file")
    meta = dict(part.split("=", 1) for part in lines[0].split("\t")[1:])
    if int(meta["format"]) != FORMAT_VERSION:
        raise ValueError(f"cache format {meta['format']} is not {FORMAT_VERSION}")
    records = []
    for line in lines[1:]:
        if not line.strip():
            continue
        prog_hex, length, status, steps, out_hex, out_len = line.split("\t")
        status = Status(status)
        out_len = int(out_len)
        output = _unhex(out_hex, out_len) if status is Status.HALTED else None
        records.append(Record(_unhex(prog_hex, int(length)), status, int(steps), output,
                              out_len if out_len >= 0 else None))
    return ProgramTable(int(meta["L_max"]), int(meta["T_max"]), records)


def merge_tables(a: ProgramTable, b: ProgramTable) -> ProgramTable:
    """Union of two tables with the same key; disagreeing records are an error."""
    if a.key() != b.key():
        raise ValueError(f"cannot merge tables with keys {a.key()} and {b.key()}")
    merged = {r.program: r for r in a.records}
    for r in b.records:
        if merged.setdefault(r.program, r) != r:
            raise ValueError(f"tables disagree on program {r.program}")
    return ProgramTable(a.L_max, a.T_max, list(merged.values()))


def load_or_build(L_max: int, T_max: int, cache: Optional[str | Path] = None) -> ProgramTable:
    """Read the table from ``cache`` when present with matching budgets, else build and store it."""
    if cache is not None and Path(cache).exists():
        table = read_cache(cache)
        if (table.L_max, table.T_max) == (L_max, T_max):
            return table
    table = program_table(L_max, T_max)
    if cache is not None:
        write_cache(cache, table)
    return table
