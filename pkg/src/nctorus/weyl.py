"""Finitely supported elements of the noncommutative torus.

An element is a finite sum of terms ``c * e(theta*k) * u^r v^s`` where
``e(x) = exp(2 pi i x)`` and ``v u = e(theta) u v``.  Terms are keyed by
``(r, s, k)``: the phase exponent ``k`` is carried as an exact integer so
that products and adjoints only do integer bookkeeping on it, and the
phase is evaluated once, with an exactly reduced angle, when an element is
collapsed onto the monomial basis (trace, comparison, serialization).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional

from .sl2z import SL2Matrix

DEFAULT_PRECISION_BITS = 128
PRUNE_RELATIVE = 1e-14

Term = tuple[int, int, int]


@dataclass(frozen=True)
class Theta:
    """Deformation parameter, either an exact rational or a dyadic real.

    ``ratio`` holds ``p/q`` in the rational case.  In the real case the
    value is ``numerator / 2**precision_bits`` exactly, i.e. the real
    parameter rounded to ``precision_bits`` fractional bits.
    """

    ratio: Optional[Fraction] = None
    numerator: Optional[int] = None
    precision_bits: int = DEFAULT_PRECISION_BITS
    _phases: dict = field(default_factory=dict, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if (self.ratio is None) == (self.numerator is None):
            raise ValueError("give exactly one of ratio or numerator")
        if self.ratio is not None:
            if not (0 <= self.ratio <= Fraction(1, 2)):
                raise ValueError(f"theta must lie in [0, 1/2], got {self.ratio}")
        else:
            if self.precision_bits <= 0:
                raise ValueError("precision_bits must be positive")
            if not (0 <= self.numerator <= 1 << (self.precision_bits - 1)):
                raise ValueError("theta must lie in [0, 1/2]")

    @classmethod
    def rational(cls, p: int, q: int = 1) -> "Theta":
        return cls(ratio=Fraction(p, q))

    @classmethod
    def real(cls, value, precision_bits: int = DEFAULT_PRECISION_BITS) -> "Theta":
        """Round ``value`` (str, Decimal, Fraction, float) to ``precision_bits`` bits."""
        frac = Fraction(value) if not isinstance(value, str) else Fraction(value.strip())
        return cls(numerator=round(frac * (1 << precision_bits)), precision_bits=precision_bits)

    @classmethod
    def golden(cls, precision_bits: int = DEFAULT_PRECISION_BITS) -> "Theta":
        """``(3 - sqrt 5)/2``, the irrational sample used throughout the tests."""
        scale = 1 << precision_bits
        num = (3 * scale - math.isqrt(5 * scale * scale)) // 2
        return cls(numerator=num, precision_bits=precision_bits)

    @classmethod
    def parse(cls, text: str, precision_bits: int = DEFAULT_PRECISION_BITS) -> "Theta":
        text = text.strip()
        if text == "golden":
            return cls.golden(precision_bits)
        if "/" in text:
            return cls(ratio=Fraction(text))
        return cls.real(text, precision_bits)

    @property
    def is_rational(self) -> bool:
        return self.ratio is not None

    @property
    def phase_period(self) -> Optional[int]:
        """Phase exponents may be reduced modulo this (None when no reduction is used)."""
        return self.ratio.denominator if self.ratio is not None else None

    def value(self) -> Fraction:
        if self.ratio is not None:
            return self.ratio
        return Fraction(self.numerator, 1 << self.precision_bits)

    def turns(self, k: int) -> Fraction:
        """``theta*k mod 1`` computed exactly."""
        if self.ratio is not None:
            p, q = self.ratio.numerator, self.ratio.denominator
            return Fraction((p * k) % q, q)
        mod = 1 << self.precision_bits
        return Fraction((self.numerator * k) % mod, mod)

    def phase(self, k: int) -> complex:
        """``exp(2 pi i theta k)``."""
        z = self._phases.get(k)
        if z is None:
            z = _unit(self.turns(k))
            if len(self._phases) < 1 << 16:
                self._phases[k] = z
        return z

    def __str__(self) -> str:
        if self.ratio is not None:
            return f"{self.ratio.numerator}/{self.ratio.denominator}"
        digits = max(1, int(self.precision_bits * math.log10(2)))
        frac = self.value()
        scaled = frac.numerator * 10 ** digits // frac.denominator
        return f"0.{scaled:0{digits}d}"


def _unit(turns: Fraction) -> complex:
    # split off whole eighths of a turn so the float angle stays below pi/4
    eighth, rem = divmod(8 * turns.numerator, turns.denominator)
    base = _EIGHTHS[eighth % 8]
    if rem == 0:
        return base
    x = 2 * math.pi * (rem / (8 * turns.denominator))
    return base * complex(math.cos(x), math.sin(x))


_S = math.sqrt(0.5)
_EIGHTHS = (1 + 0j, complex(_S, _S), 1j, complex(-_S, _S), -1 + 0j, complex(-_S, -_S), -1j, complex(_S, -_S))


class ThetaMismatch(ValueError):
    pass


class WeylElement:
    """Immutable finite sum of phased monomials ``c e(theta k) u^r v^s``."""

    __slots__ = ("theta", "_terms", "_collapsed")

    def __init__(self, theta: Theta, terms: Mapping[Term, complex] = ()):
        self.theta = theta
        self._terms: dict[Term, complex] = _normalize(theta, terms)
        self._collapsed: Optional[dict[tuple[int, int], complex]] = None

    @classmethod
    def _raw(cls, theta: Theta, terms: dict[Term, complex]) -> "WeylElement":
        obj = cls.__new__(cls)
        obj.theta = theta
        obj._terms = terms
        obj._collapsed = None
        return obj

    @classmethod
    def from_coeffs(cls, theta: Theta, coeffs: Mapping[tuple[int, int], complex]) -> "WeylElement":
        return cls(theta, {(r, s, 0): c for (r, s), c in coeffs.items()})

    @property
    def terms(self) -> dict[Term, complex]:
        return dict(self._terms)

    def coeffs(self) -> dict[tuple[int, int], complex]:
        """Coefficients ``a_rs`` on the ordered monomial basis ``u^r v^s``."""
        if self._collapsed is None:
            out: dict[tuple[int, int], complex] = {}
            for (r, s, k), c in self._terms.items():
                out[(r, s)] = out.get((r, s), 0j) + c * self.theta.phase(k)
            self._collapsed = _prune(out)
        return dict(self._collapsed)

    def support(self) -> set[tuple[int, int]]:
        return set(self.coeffs())

    def is_monomial(self) -> bool:
        return len({(r, s) for r, s, _ in self._terms}) == 1

    def _check(self, other: "WeylElement"):
        if other.theta != self.theta:
            raise ThetaMismatch(f"theta {self.theta} != {other.theta}")

    def __add__(self, other: "WeylElement") -> "WeylElement":
        self._check(other)
        out = dict(self._terms)
        for key, c in other._terms.items():
            out[key] = out.get(key, 0j) + c
        return WeylElement(self.theta, out)

    def __neg__(self) -> "WeylElement":
        return WeylElement._raw(self.theta, {key: -c for key, c in self._terms.items()})

    def __sub__(self, other: "WeylElement") -> "WeylElement":
        return self + (-other)

    def scale(self, z: complex) -> "WeylElement":
        return WeylElement(self.theta, {key: c * z for key, c in self._terms.items()})

    def __mul__(self, other):
        if isinstance(other, WeylElement):
            return mul(self, other)
        return self.scale(complex(other))

    __rmul__ = scale

    def __truediv__(self, z) -> "WeylElement":
        return self.scale(1 / complex(z))

    def __repr__(self) -> str:
        body = " + ".join(
            f"({c.real:.6g}{c.imag:+.6g}j)u^{r}v^{s}" for (r, s), c in sorted(self.coeffs().items())
        )
        return f"WeylElement(theta={self.theta}, {body or '0'})"

    def allclose(self, other: "WeylElement", atol: float = 1e-12) -> bool:
        self._check(other)
        a, b = self.coeffs(), other.coeffs()
        return all(abs(a.get(key, 0j) - b.get(key, 0j)) <= atol for key in set(a) | set(b))

    def max_abs_diff(self, other: "WeylElement") -> float:
        a, b = self.coeffs(), other.coeffs()
        return max((abs(a.get(k, 0j) - b.get(k, 0j)) for k in set(a) | set(b)), default=0.0)

    def to_json(self) -> dict:
        terms = [
            {"r": r, "s": s, "re": c.real, "im": c.imag}
            for (r, s), c in sorted(self.coeffs().items())
        ]
        return {"theta": str(self.theta), "terms": terms}

    @classmethod
    def from_json(cls, data: Mapping, theta: Optional[Theta] = None) -> "WeylElement":
        theta = theta or Theta.parse(data["theta"])
        coeffs = {(t["r"], t["s"]): complex(t["re"], t["im"]) for t in data["terms"]}
        return cls.from_coeffs(theta, coeffs)


def _normalize(theta: Theta, terms: Mapping[Term, complex]) -> dict[Term, complex]:
    period = theta.phase_period
    out: dict[Term, complex] = {}
    for (r, s, k), c in dict(terms).items():
        if period is not None:
            k %= period
        key = (r, s, k)
        out[key] = out.get(key, 0j) + complex(c)
    return _prune(out)


def _prune(coeffs: dict) -> dict:
    if not coeffs:
        return coeffs
    cutoff = PRUNE_RELATIVE * max(abs(c) for c in coeffs.values())
    return {key: c for key, c in coeffs.items() if abs(c) > cutoff}


def monomial(theta: Theta, r: int, s: int, coeff: complex = 1) -> WeylElement:
    return WeylElement(theta, {(r, s, 0): coeff})


def identity(theta: Theta) -> WeylElement:
    return monomial(theta, 0, 0, 1)


def zero(theta: Theta) -> WeylElement:
    return WeylElement(theta, {})


def mul(x: WeylElement, y: WeylElement) -> WeylElement:
    """Product via ``(u^a v^b)(u^c v^d) = e(theta b c) u^(a+c) v^(b+d)``."""
    x._check(y)
    period = x.theta.phase_period
    out: dict[Term, complex] = {}
    for (r1, s1, k1), c1 in x._terms.items():
        for (r2, s2, k2), c2 in y._terms.items():
            k = k1 + k2 + s1 * r2
            if period is not None:
                k %= period
            key = (r1 + r2, s1 + s2, k)
            out[key] = out.get(key, 0j) + c1 * c2
    if len(x._terms) == 1 or len(y._terms) == 1:
        return WeylElement._raw(x.theta, out)
    return WeylElement._raw(x.theta, _prune(out))


def adjoint(x: WeylElement) -> WeylElement:
    """``(u^a v^b)* = e(theta a b) u^-a v^-b``, extended conjugate-linearly."""
    period = x.theta.phase_period
    out = {}
    for (r, s, k), c in x._terms.items():
        k2 = r * s - k
        if period is not None:
            k2 %= period
        out[(-r, -s, k2)] = c.conjugate()
    return WeylElement._raw(x.theta, out)


def trace_state(x: WeylElement) -> complex:
    """The tracial state: the coefficient of ``u^0 v^0``."""
    total = 0j
    for (r, s, k), c in x._terms.items():
        if r == 0 and s == 0:
            total += c * x.theta.phase(k)
    return total


def power(x: WeylElement, n: int) -> WeylElement:
    """``x**n`` by repeated multiplication; negative ``n`` uses the adjoint of the positive power."""
    if n < 0:
        return adjoint(power(x, -n))
    result = identity(x.theta)
    for _ in range(n):
        result = mul(result, x)
    return result


def _monomial_image(C: SL2Matrix, theta: Theta, r: int, s: int) -> Term:
    """``alpha_C(u^r v^s)`` as a single phased term (coefficient 1)."""
    img = mul(power(monomial(theta, C.a, C.b), r), power(monomial(theta, C.c, C.d), s))
    ((key, c),) = img._terms.items()
    assert abs(c - 1) < 1e-15, c
    return key


class Automorphism:
    """``alpha_C``: ``u -> u^a v^b``, ``v -> u^c v^d``, with monomial images memoized."""

    def __init__(self, C: SL2Matrix, theta: Theta):
        self.C = C
        self.theta = theta
        self._cache: dict[tuple[int, int], Term] = {}

    def image_term(self, r: int, s: int) -> Term:
        key = (r, s)
        img = self._cache.get(key)
        if img is None:
            img = self._cache[key] = _monomial_image(self.C, self.theta, r, s)
        return img

    def __call__(self, x: WeylElement) -> WeylElement:
        if x.theta != self.theta:
            raise ThetaMismatch(f"theta {x.theta} != {self.theta}")
        out: dict[Term, complex] = {}
        for (r, s, k), c in x._terms.items():
            r2, s2, k2 = self.image_term(r, s)
            key = (r2, s2, k + k2)
            out[key] = out.get(key, 0j) + c
        return WeylElement(self.theta, out)


def apply_auto(C: SL2Matrix, x: WeylElement) -> WeylElement:
    return Automorphism(C, x.theta)(x)


def linear_combination(theta: Theta, pairs: Iterable[tuple[complex, WeylElement]]) -> WeylElement:
    out: dict[Term, complex] = {}
    for z, x in pairs:
        for key, c in x._terms.items():
            out[key] = out.get(key, 0j) + z * c
    return WeylElement(theta, out)
