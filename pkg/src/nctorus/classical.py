"""The classical toral automorphism, grid partitions and symbolic words.

Points are either exact rationals or dyadic fixed-point numbers with ``P``
fractional bits.  The linear map has integer entries, so the fixed-point
orbit is the *exact* orbit of the dyadic seed; the only approximation is
the seed itself, and ``symbolic_translate`` refuses word lengths for which
that approximation can reach the symbols.
"""
from __future__ import annotations

import math
import random
import struct
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .sl2z import SL2Matrix, spectral_radius

DEFAULT_PRECISION = 512
GUARD_BITS = 16
ACTIONS = ("transpose", "direct")

WORD_MAGIC = b"NCTW"
WORD_VERSION = 1
_HEADER = struct.Struct("<4sIII")


class PrecisionError(ValueError):
    def __init__(self, required: int, available: int):
        super().__init__(f"symbolic word needs at least {required} fractional bits, have {available}")
        self.required = required
        self.available = available


def linear_map(C: SL2Matrix, action: str = "transpose") -> tuple[tuple[int, int], tuple[int, int]]:
    """Matrix acting on column vectors ``(x, y)``.

    ``transpose``: ``(x, y) -> (a x + c y, b x + d y)``, matching ``u -> u^a v^b`` on characters.
    ``direct``: ``(x, y) -> (a x + b y, c x + d y)``.
    """
    if action == "transpose":
        return ((C.a, C.c), (C.b, C.d))
    if action == "direct":
        return ((C.a, C.b), (C.c, C.d))
    raise ValueError(f"action must be one of {ACTIONS}, got {action!r}")


def lyapunov_bits(C: SL2Matrix) -> float:
    """``log2`` of the spectral radius."""
    return math.log2(float(spectral_radius(C.trace)))


def required_precision(C: SL2Matrix, k: int) -> int:
    return math.ceil(k * lyapunov_bits(C)) + GUARD_BITS


@dataclass(frozen=True)
class TorusPoint:
    """Point of ``[0,1)^2``.

    With ``bits=None`` the coordinates are ``Fraction``; otherwise they are
    integers ``X, Y`` in ``[0, 2**bits)`` standing for ``X / 2**bits``.
    """

    x: Fraction | int
    y: Fraction | int
    bits: Optional[int] = None

    def __post_init__(self):
        if self.bits is None:
            object.__setattr__(self, "x", Fraction(self.x) % 1)
            object.__setattr__(self, "y", Fraction(self.y) % 1)
        else:
            if self.bits <= 0:
                raise ValueError("bits must be positive")
            mask = (1 << self.bits) - 1
            object.__setattr__(self, "x", int(self.x) & mask)
            object.__setattr__(self, "y", int(self.y) & mask)

    @property
    def is_exact(self) -> bool:
        return self.bits is None

    def fractions(self) -> tuple[Fraction, Fraction]:
        if self.bits is None:
            return self.x, self.y
        scale = 1 << self.bits
        return Fraction(self.x, scale), Fraction(self.y, scale)

    @classmethod
    def from_fractions(cls, x, y, bits: Optional[int] = None) -> "TorusPoint":
        x, y = Fraction(x) % 1, Fraction(y) % 1
        if bits is None:
            return cls(x, y)
        scale = 1 << bits
        return cls(math.floor(x * scale), math.floor(y * scale), bits)

    @classmethod
    def random(cls, rng: random.Random, bits: int = DEFAULT_PRECISION) -> "TorusPoint":
        return cls(rng.getrandbits(bits), rng.getrandbits(bits), bits)


def random_seeds(seed: int, count: int, bits: int = DEFAULT_PRECISION) -> list[TorusPoint]:
    rng = random.Random(seed)
    return [TorusPoint.random(rng, bits) for _ in range(count)]


def step(C: SL2Matrix, p: TorusPoint, action: str = "transpose") -> TorusPoint:
    (l00, l01), (l10, l11) = linear_map(C, action)
    return TorusPoint(l00 * p.x + l01 * p.y, l10 * p.x + l11 * p.y, p.bits)


def orbit(C: SL2Matrix, p: TorusPoint, k: int, action: str = "transpose") -> list[TorusPoint]:
    out = [p]
    for _ in range(k - 1):
        out.append(step(C, out[-1], action))
    return out


@dataclass(frozen=True)
class GridPartition:
    """``m x m`` congruent cells, indexed ``floor(x m) + m floor(y m)``."""

    m: int

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("grid size must be positive")

    @property
    def size(self) -> int:
        return self.m * self.m

    def cell_measure(self) -> Fraction:
        return Fraction(1, self.size)

    def cell(self, p: TorusPoint) -> int:
        if p.bits is None:
            return math.floor(p.x * self.m) + self.m * math.floor(p.y * self.m)
        return ((p.x * self.m) >> p.bits) + self.m * ((p.y * self.m) >> p.bits)


@dataclass(frozen=True)
class SymbolicWord:
    alphabet_size: int
    digits: tuple[int, ...]

    def __post_init__(self):
        if self.alphabet_size < 2:
            raise ValueError("alphabet needs at least two letters")
        digits = tuple(map(int, self.digits))
        if digits and (min(digits) < 0 or max(digits) >= self.alphabet_size):
            raise ValueError(f"digit outside alphabet of size {self.alphabet_size}")
        object.__setattr__(self, "digits", digits)

    def __len__(self) -> int:
        return len(self.digits)

    def __iter__(self):
        return iter(self.digits)

    def __add__(self, other: "SymbolicWord") -> "SymbolicWord":
        if other.alphabet_size != self.alphabet_size:
            raise ValueError("alphabets differ")
        return SymbolicWord(self.alphabet_size, self.digits + other.digits)

    def bits(self) -> str:
        if self.alphabet_size != 2:
            raise ValueError("only binary words convert to bit strings")
        return "".join(map(str, self.digits))

    def to_text(self) -> str:
        if self.alphabet_size <= 10:
            return "".join(map(str, self.digits))
        return ",".join(map(str, self.digits))

    @classmethod
    def from_text(cls, text: str, alphabet_size: int) -> "SymbolicWord":
        text = text.strip()
        if alphabet_size <= 10:
            return cls(alphabet_size, tuple(int(ch) for ch in text))
        return cls(alphabet_size, tuple(int(t) for t in text.split(",") if t))


def _fixed_itinerary(
    L, X: int, Y: int, P: int, m: int, k: int, block: int = 64, guard: int = 64
) -> list[int]:
    """Cell labels of ``k`` steps of the exact dyadic orbit of ``(X, Y) / 2**P``.

    Labels inside a block of steps are read off the top ``W`` bits only.
    The discarded low bits move the true value inside a known interval;
    whenever that interval straddles a cell boundary the label is
    recomputed from the full state, so the result is exact.
    """
    (l00, l01), (l10, l11) = L
    mask = (1 << P) - 1
    lg = math.log2(max(1.0, _radius(L)))
    W = math.ceil(block * lg) + guard
    out: list[int] = []
    if W >= P:
        for _ in range(k):
            out.append(((X * m) >> P) + m * ((Y * m) >> P))
            X, Y = (l00 * X + l01 * Y) & mask, (l10 * X + l11 * Y) & mask
        return out
    s = P - W
    wmask = (1 << W) - 1
    done = 0
    while done < k:
        b = min(block, k - done)
        vx, vy = X >> s, Y >> s
        a00, a01, a10, a11 = 1, 0, 0, 1
        for _ in range(b):
            label = 0
            for v, r0, r1, weight in ((vx, a00, a01, 1), (vy, a10, a11, m)):
                lo = v + (r0 if r0 < 0 else 0) + (r1 if r1 < 0 else 0)
                hi = v + (r0 if r0 > 0 else 0) + (r1 if r1 > 0 else 0)
                cell = (m * (lo & wmask)) >> W
                if lo >> W != hi >> W or cell != (m * (hi & wmask)) >> W:
                    cell = (((r0 * X + r1 * Y) & mask) * m) >> P
                label += weight * cell
            out.append(label)
            vx, vy = (l00 * vx + l01 * vy) & wmask, (l10 * vx + l11 * vy) & wmask
            a00, a01, a10, a11 = (
                l00 * a00 + l01 * a10, l00 * a01 + l01 * a11,
                l10 * a00 + l11 * a10, l10 * a01 + l11 * a11,
            )
        X, Y = (a00 * X + a01 * Y) & mask, (a10 * X + a11 * Y) & mask
        done += b
    return out


def _radius(L) -> float:
    (l00, l01), (l10, l11) = L
    t = abs(l00 + l11)
    return (t + math.sqrt(t * t - 4)) / 2 if t > 2 else 1.0


def symbolic_translate(
    C: SL2Matrix,
    A: GridPartition,
    p: TorusPoint,
    k: int,
    action: str = "transpose",
) -> SymbolicWord:
    """Labels of the cells visited by ``p, T p, ..., T^{k-1} p``."""
    if k < 0:
        raise ValueError("k must be non-negative")
    L = linear_map(C, action)
    if p.bits is None:
        digits = [A.cell(q) for q in orbit(C, p, k, action)] if k else []
        return SymbolicWord(max(2, A.size), tuple(digits))
    need = required_precision(C, k)
    if need > p.bits:
        raise PrecisionError(need, p.bits)
    digits = _fixed_itinerary(L, p.x, p.y, p.bits, A.m, k)
    return SymbolicWord(max(2, A.size), tuple(digits))


def trajectory_words(
    C: SL2Matrix,
    A: GridPartition,
    k: int,
    count: int,
    seed: int,
    precision: int | str = DEFAULT_PRECISION,
    action: str = "transpose",
) -> list[SymbolicWord]:
    """Words from ``count`` seeds drawn from ``random.Random(seed)``.

    ``precision="auto"`` uses ``max(DEFAULT_PRECISION, required)`` bits so
    that long words stay trustworthy.
    """
    bits = max(DEFAULT_PRECISION, required_precision(C, k)) if precision == "auto" else int(precision)
    return [symbolic_translate(C, A, p, k, action) for p in random_seeds(seed, count, bits)]


def itinerary_array(
    C: SL2Matrix,
    A: GridPartition,
    k: int,
    count: int,
    seed: int,
    precision: int = DEFAULT_PRECISION,
    action: str = "transpose",
) -> np.ndarray:
    """``count x k`` array of labels, same seeds as ``trajectory_words``.

    Up to 64 bits the orbit is iterated in ``uint64`` (wrap-around is
    exactly reduction mod 1); beyond that each seed goes through Python
    integers.
    """
    need = required_precision(C, k)
    if need > precision:
        raise PrecisionError(need, precision)
    rng = random.Random(seed)
    coords = [(rng.getrandbits(precision), rng.getrandbits(precision)) for _ in range(count)]
    L = linear_map(C, action)
    if precision > 64:
        out = np.empty((count, k), dtype=np.int64)
        for i, (X, Y) in enumerate(coords):
            out[i] = _fixed_itinerary(L, X, Y, precision, A.m, k)
        return out
    X = np.array([c[0] for c in coords], dtype=np.uint64)
    Y = np.array([c[1] for c in coords], dtype=np.uint64)
    (l00, l01), (l10, l11) = (tuple(np.uint64(v % (1 << 64)) for v in row) for row in L)
    out = np.empty((count, k), dtype=np.int64)
    m = A.m
    pmask = np.uint64((1 << precision) - 1)
    for j in range(k):
        out[:, j] = _top_cells(X, precision, m) + m * _top_cells(Y, precision, m)
        # uint64 wrap-around is reduction mod 2**64, hence mod 2**precision after masking
        X, Y = (l00 * X + l01 * Y) & pmask, (l10 * X + l11 * Y) & pmask
    return out


def _top_cells(X: np.ndarray, precision: int, m: int) -> np.ndarray:
    """``floor(m X / 2**precision)`` for ``uint64`` ``X`` without overflow."""
    if m & (m - 1) == 0:
        return (X >> np.uint64(precision - (m.bit_length() - 1))).astype(np.int64)
    # general m: exact via Python ints
    return np.array([(int(v) * m) >> precision for v in X], dtype=np.int64)


def preimage_measure_estimate(
    C: SL2Matrix, A: GridPartition, samples: int, seed: int, action: str = "transpose"
) -> tuple[np.ndarray, np.ndarray]:
    """Monte Carlo ``mu(T^-1 A_i)`` and its standard error for every cell.

    Uniform 64-bit dyadic points are pushed forward exactly; the fraction
    landing in ``A_i`` estimates the measure of its preimage.
    """
    rng = np.random.default_rng(seed)
    X = rng.integers(0, 2**64, size=samples, dtype=np.uint64)
    Y = rng.integers(0, 2**64, size=samples, dtype=np.uint64)
    (l00, l01), (l10, l11) = (tuple(np.uint64(v % (1 << 64)) for v in row) for row in linear_map(C, action))
    X2, Y2 = l00 * X + l01 * Y, l10 * X + l11 * Y
    cells = _top_cells(X2, 64, A.m) + A.m * _top_cells(Y2, 64, A.m)
    counts = np.bincount(cells, minlength=A.size)
    p = counts / samples
    se = np.sqrt(p * (1 - p) / samples)
    return p, se


# ---------------------------------------------------------------- n-adic codecs


def _digits_to_int(digits: Sequence[int], base: int) -> int:
    if base & (base - 1) == 0 and base <= 16:
        width = base.bit_length() - 1
        text = "".join(format(d, "x") for d in digits) if width == 4 else "".join(format(d, f"0{width}b") for d in digits)
        return int(text, 16 if width == 4 else 2) if text else 0
    return _digits_to_int_dc(digits, base)


def _digits_to_int_dc(digits: Sequence[int], base: int) -> int:
    n = len(digits)
    if n <= 64:
        value = 0
        for d in digits:
            value = value * base + d
        return value
    half = n // 2
    return _digits_to_int_dc(digits[:half], base) * base ** (n - half) + _digits_to_int_dc(digits[half:], base)


def _int_to_digits(value: int, base: int, width: int) -> list[int]:
    """``width`` base-``base`` digits of ``0 <= value < base**width``, most significant first."""
    if width <= 64:
        out = [0] * width
        for i in range(width - 1, -1, -1):
            value, out[i] = divmod(value, base)
        return out
    if base == 2:
        return [int(ch) for ch in format(value, f"0{width}b")]
    half = width // 2
    hi, lo = divmod(value, base ** (width - half))
    return _int_to_digits(hi, base, half) + _int_to_digits(lo, base, width - half)


def nadic_value(w: SymbolicWord) -> Fraction:
    """``sum_i w_i / n^i`` for the finite word ``w`` (the word extended by zeros)."""
    n = w.alphabet_size
    return Fraction(_digits_to_int(w.digits, n), n ** len(w))


def nadic_digits(q, n: int, t: int) -> SymbolicWord:
    """First ``t`` digits of the nonterminating base-``n`` expansion of ``q`` in ``[0, 1]``.

    Numbers with a terminating expansion are written with a tail of
    ``n-1``; zero is all zeros.  The first ``t`` digits of the
    nonterminating form are those of ``ceil(q n^t) - 1``.
    """
    q = Fraction(q)
    if n < 2:
        raise ValueError("base must be at least 2")
    if not 0 <= q <= 1:
        raise ValueError(f"q must lie in [0, 1], got {q}")
    return _leading_digits(q.numerator, q.denominator, n, t)


def _leading_digits(num: int, den: int, n: int, t: int) -> SymbolicWord:
    if num == 0:
        return SymbolicWord(n, (0,) * t)
    scaled = num * n ** t
    if den & (den - 1) == 0:
        top = -((-scaled) >> (den.bit_length() - 1)) - 1
    else:
        top = -(-scaled // den) - 1
    return SymbolicWord(n, tuple(_int_to_digits(top, n, t)))


def guard_length(n1: int, n2: int, t2: int) -> int:
    """Input digits required before ``t2`` base-``n2`` digits are emitted."""
    return math.ceil(t2 * math.log(n2) / math.log(n1) - 1e-12) + 2


def change_basis(w: SymbolicWord, n2: int, t2: int) -> SymbolicWord:
    """``t2`` digits of ``r_{n2}(v_{n1}(w 0 0 ...))``."""
    need = guard_length(w.alphabet_size, n2, t2)
    if len(w) < need:
        raise ValueError(f"{t2} base-{n2} digits need at least {need} input digits, got {len(w)}")
    n1 = w.alphabet_size
    return _leading_digits(_digits_to_int(w.digits, n1), n1 ** len(w), n2, t2)


def max_output_digits(length: int, n1: int, n2: int) -> int:
    """Largest ``t2`` allowed by ``guard_length`` for an input of ``length`` digits."""
    if length < 2:
        return 0
    t2 = max(0, math.floor((length - 2) * math.log(n1) / math.log(n2) + 1e-9))
    while t2 > 0 and guard_length(n1, n2, t2) > length:
        t2 -= 1
    return t2


def to_binary(w: SymbolicWord) -> SymbolicWord:
    """The longest guard-respecting prefix of ``cb_{n,2}(w)``."""
    t2 = max_output_digits(len(w), w.alphabet_size, 2)
    return change_basis(w, 2, t2)


# ---------------------------------------------------------------- word files


def write_word(path: str | Path, w: SymbolicWord) -> None:
    if w.alphabet_size > 256:
        raise ValueError("byte-per-digit format holds alphabets of at most 256 letters")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(WORD_MAGIC, WORD_VERSION, w.alphabet_size, len(w)))
        fh.write(bytes(w.digits))


def read_word(path: str | Path) -> SymbolicWord:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise ValueError("file too short for a word header")
    magic, version, alphabet, length = _HEADER.unpack_from(data)
    if magic != WORD_MAGIC:
        raise ValueError(f"bad magic {magic!r}")
    if version != WORD_VERSION:
        raise ValueError(f"unsupported word format version {version}")
    body = data[_HEADER.size:]
    if len(body) != length:
        raise ValueError(f"header says {length} digits, file holds {len(body)}")
    return SymbolicWord(alphabet, tuple(body))


def concat_words(words: Iterable[SymbolicWord]) -> SymbolicWord:
    words = list(words)
    return SymbolicWord(words[0].alphabet_size, tuple(d for w in words for d in w.digits))
