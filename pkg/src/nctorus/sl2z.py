"""Integer matrices of determinant one and their dynamical entropy.

The entropy of the automorphism induced by ``C`` on the torus (classical,
CNT and AFL alike) is ``log lambda`` for the chaotic matrices and zero
otherwise.  ``lambda`` is kept as an exact quadratic surd so that nothing
downstream depends on floating point rounding of the eigenvalue.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from decimal import Decimal, localcontext
from enum import Enum
from typing import Iterator, Optional

DECIMAL_DIGITS = 50
_GUARD_DIGITS = 15
MAX_ORDER_SEARCH = 12

TSV_COLUMNS = (
    "a", "b", "c", "d", "trace", "class", "order",
    "lambda_decimal", "entropy_nats", "entropy_bits", "chaotic",
)


class TraceMode(str, Enum):
    POSITIVE = "positive"      # chaotic iff Tr C > 2
    HYPERBOLIC = "hyperbolic"  # chaotic iff |Tr C| > 2

    @classmethod
    def _missing_(cls, value):
        # older name for the positive-trace rule, still accepted on input
        return cls.POSITIVE if value == "paper" else None


class ConjugacyClass(str, Enum):
    IDENTITY = "identity"
    MINUS_IDENTITY = "minus_identity"
    ELLIPTIC = "elliptic"
    PARABOLIC = "parabolic"
    HYPERBOLIC = "hyperbolic"


@dataclass(frozen=True)
class SL2Matrix:
    """``[[a, b], [c, d]]`` with ``ad - bc = 1``."""

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        for name in ("a", "b", "c", "d"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int):
                raise TypeError(f"entry {name} must be an int, got {value!r}")
        det = self.a * self.d - self.b * self.c
        if det != 1:
            raise ValueError(f"determinant is {det}, not 1: {self.entries}")

    @classmethod
    def parse(cls, text: str) -> "SL2Matrix":
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 4:
            raise ValueError(f"expected a,b,c,d; got {text!r}")
        return cls(*(int(p) for p in parts))

    @classmethod
    def identity(cls) -> "SL2Matrix":
        return cls(1, 0, 0, 1)

    @property
    def entries(self) -> tuple[int, int, int, int]:
        return (self.a, self.b, self.c, self.d)

    @property
    def trace(self) -> int:
        return self.a + self.d

    def __matmul__(self, other: "SL2Matrix") -> "SL2Matrix":
        return SL2Matrix(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def __neg__(self) -> "SL2Matrix":
        return SL2Matrix(-self.a, -self.b, -self.c, -self.d)

    def inverse(self) -> "SL2Matrix":
        return SL2Matrix(self.d, -self.b, -self.c, self.a)

    def transpose(self) -> "SL2Matrix":
        return SL2Matrix(self.a, self.c, self.b, self.d)

    def __pow__(self, n: int) -> "SL2Matrix":
        base = self if n >= 0 else self.inverse()
        n = abs(n)
        result = SL2Matrix.identity()
        while n:
            if n & 1:
                result = result @ base
            base = base @ base
            n >>= 1
        return result

    def __str__(self) -> str:
        return f"({self.a},{self.b};{self.c},{self.d})"


def _squarefree_split(n: int) -> tuple[int, int]:
    """Return ``(f, m)`` with ``n = f*f*m`` and ``m`` squarefree."""
    f, m = 1, n
    p = 2
    while p * p <= m:
        while m % (p * p) == 0:
            m //= p * p
            f *= p
        p += 1
    return f, m


@dataclass(frozen=True)
class QuadraticSurd:
    """The real number ``(p + q*sqrt(D)) / 2`` with ``D`` squarefree (or 0)."""

    p: int
    q: int
    D: int

    def decimal(self, digits: int = DECIMAL_DIGITS) -> Decimal:
        work = digits + _GUARD_DIGITS
        scale = 10 ** work
        root = math.isqrt(self.D * scale * scale)
        with localcontext() as ctx:
            ctx.prec = work
            value = (Decimal(self.p * scale + self.q * root) / 2) / scale
            ctx.prec = digits
            return +value

    def conjugate(self) -> "QuadraticSurd":
        return QuadraticSurd(self.p, -self.q, self.D)

    def __float__(self) -> float:
        return float(self.decimal(20))

    def __str__(self) -> str:
        if self.q == 0 or self.D == 0:
            whole, rem = divmod(self.p, 2)
            return str(whole) if rem == 0 else f"{self.p}/2"
        sign = "+" if self.q > 0 else "-"
        coeff = "" if abs(self.q) == 1 else str(abs(self.q))
        return f"({self.p}{sign}{coeff}√{self.D})/2"


def spectral_radius(trace: int) -> QuadraticSurd:
    """Largest eigenvalue modulus of any SL(2,Z) matrix with this trace."""
    t = abs(trace)
    if t <= 2:
        return QuadraticSurd(2, 0, 0)
    f, m = _squarefree_split(t * t - 4)
    return QuadraticSurd(t, f, m)


@dataclass(frozen=True)
class SpectralReport:
    matrix: SL2Matrix
    trace_mode: TraceMode
    trace: int
    conjugacy_class: ConjugacyClass
    lambda_max: QuadraticSurd
    lambda_decimal: str
    chaotic: bool
    entropy_nats: float
    entropy_bits: float
    entropy_nats_decimal: str
    matrix_order: Optional[int]  # None means infinite order

    def to_dict(self) -> dict:
        return {
            "matrix": list(self.matrix.entries),
            "trace_mode": self.trace_mode.value,
            "trace": self.trace,
            "class": self.conjugacy_class.value,
            "order": self.matrix_order if self.matrix_order is not None else "infinite",
            "lambda": str(self.lambda_max),
            "lambda_surd": {"p": self.lambda_max.p, "q": self.lambda_max.q, "D": self.lambda_max.D},
            "lambda_decimal": self.lambda_decimal,
            "chaotic": self.chaotic,
            "entropy_nats": self.entropy_nats,
            "entropy_bits": self.entropy_bits,
            "entropy_nats_decimal": self.entropy_nats_decimal,
        }

    def tsv_row(self) -> str:
        order = self.matrix_order if self.matrix_order is not None else "infinite"
        fields = (
            *self.matrix.entries, self.trace, self.conjugacy_class.value, order,
            self.lambda_decimal, repr(self.entropy_nats), repr(self.entropy_bits),
            str(self.chaotic).lower(),
        )
        return "\t".join(str(f) for f in fields)


def _conjugacy_class(C: SL2Matrix) -> ConjugacyClass:
    if C.entries == (1, 0, 0, 1):
        return ConjugacyClass.IDENTITY
    if C.entries == (-1, 0, 0, -1):
        return ConjugacyClass.MINUS_IDENTITY
    t = abs(C.trace)
    if t < 2:
        return ConjugacyClass.ELLIPTIC
    if t == 2:
        return ConjugacyClass.PARABOLIC
    return ConjugacyClass.HYPERBOLIC


def matrix_order(C: SL2Matrix, limit: int = MAX_ORDER_SEARCH) -> Optional[int]:
    power = C
    for k in range(1, limit + 1):
        if power.entries == (1, 0, 0, 1):
            return k
        power = power @ C
    return None


def is_chaotic(trace: int, trace_mode: TraceMode | str = TraceMode.POSITIVE) -> bool:
    mode = TraceMode(trace_mode)
    return trace > 2 if mode is TraceMode.POSITIVE else abs(trace) > 2


def classify_matrix(C: SL2Matrix, trace_mode: TraceMode | str = TraceMode.POSITIVE) -> SpectralReport:
    mode = TraceMode(trace_mode)
    lam = spectral_radius(C.trace)
    lam_dec = lam.decimal()
    chaotic = is_chaotic(C.trace, mode)
    if chaotic:
        with localcontext() as ctx:
            ctx.prec = DECIMAL_DIGITS + _GUARD_DIGITS
            ln = lam.decimal(DECIMAL_DIGITS + _GUARD_DIGITS).ln()
            ln2 = Decimal(2).ln()
            bits = ln / ln2
            ctx.prec = DECIMAL_DIGITS
            ln, bits = +ln, +bits
        nats_dec, nats, bits_f = str(ln), float(ln), float(bits)
    else:
        nats_dec, nats, bits_f = "0", 0.0, 0.0
    return SpectralReport(
        matrix=C,
        trace_mode=mode,
        trace=C.trace,
        conjugacy_class=_conjugacy_class(C),
        lambda_max=lam,
        lambda_decimal=str(lam_dec),
        chaotic=chaotic,
        entropy_nats=nats,
        entropy_bits=bits_f,
        entropy_nats_decimal=nats_dec,
        matrix_order=matrix_order(C),
    )


def iter_sl2z(max_entry: int) -> Iterator[SL2Matrix]:
    """All determinant-one matrices with entries in ``[-max_entry, max_entry]``, row-major order."""
    rng = range(-max_entry, max_entry + 1)
    for a, b, c, d in itertools.product(rng, repeat=4):
        if a * d - b * c == 1:
            yield SL2Matrix(a, b, c, d)


def sweep_classify(max_entry: int, trace_mode: TraceMode | str = TraceMode.POSITIVE) -> list[SpectralReport]:
    if max_entry < 0 or max_entry > 10:
        raise ValueError("max_entry must lie in [0, 10]")
    # many matrices share a trace; cache the expensive decimal work per trace
    mode = TraceMode(trace_mode)
    cache: dict[int, SpectralReport] = {}
    out = []
    for C in iter_sl2z(max_entry):
        proto = cache.get(C.trace)
        if proto is None:
            proto = cache[C.trace] = classify_matrix(C, mode)
        out.append(SpectralReport(
            matrix=C,
            trace_mode=mode,
            trace=C.trace,
            conjugacy_class=_conjugacy_class(C),
            lambda_max=proto.lambda_max,
            lambda_decimal=proto.lambda_decimal,
            chaotic=proto.chaotic,
            entropy_nats=proto.entropy_nats,
            entropy_bits=proto.entropy_bits,
            entropy_nats_decimal=proto.entropy_nats_decimal,
            matrix_order=matrix_order(C),
        ))
    return out
