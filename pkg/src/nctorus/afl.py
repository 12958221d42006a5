"""Alicki-Fannes-Lindblad entropy production on the noncommutative torus.

Operational partitions of unity ``X = (x_1..x_k)`` with ``sum x_i* x_i = I``
are refined under ``alpha_C`` and the von Neumann entropy of the
correlation matrix ``rho[X]_ij = tau(x_j* x_i)`` is tracked as ``n`` grows.
Every reported rate is a finite-n proxy over a fixed partition family, so
it is a lower-bound probe for the supremum, not the supremum itself.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .eigen import jacobi_eigenvalues
from .errors import NumericalInvariantError
from .sl2z import SL2Matrix
from .weyl import (
    Automorphism,
    Theta,
    ThetaMismatch,
    WeylElement,
    adjoint,
    identity,
    linear_combination,
    monomial,
    mul,
    trace_state,
)

UNITY_TOL = 1e-10
HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-9
MAX_BLOCK = 4096
MAX_ELEMENTS = 1 << 20

PROFILE_LABEL = "finite-n AFL rate over a fixed partition (lower-bound proxy)"


class PartitionError(NumericalInvariantError):
    pass


class OperationalPartition:
    """An ordered tuple of torus elements whose ``x_i* x_i`` sum to the identity."""

    def __init__(self, elements: Sequence[WeylElement], check: bool = True, tol: float = UNITY_TOL):
        elements = tuple(elements)
        if not elements:
            raise ValueError("an operational partition needs at least one element")
        theta = elements[0].theta
        for x in elements[1:]:
            if x.theta != theta:
                raise ThetaMismatch("all partition elements must share theta")
        self.elements = elements
        self.theta = theta
        if check:
            defect = self.unity_defect()
            if defect > tol:
                raise PartitionError(f"sum x_i* x_i differs from I by {defect:.3g}")

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __getitem__(self, i):
        return self.elements[i]

    def unity_defect(self) -> float:
        total = linear_combination(self.theta, ((1, mul(adjoint(x), x)) for x in self.elements))
        return total.max_abs_diff(identity(self.theta))


@dataclass
class CorrelationMatrix:
    """Hermitian, unit-trace, positive semidefinite ``k x k`` matrix."""

    entries: np.ndarray
    _eigenvalues: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        A = np.asarray(self.entries, dtype=complex)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError(f"square matrix required, got {A.shape}")
        self.entries = A
        herm = np.max(np.abs(A - A.conj().T)) if A.size else 0.0
        if herm > HERMITIAN_TOL:
            raise NumericalInvariantError(f"correlation matrix not Hermitian (defect {herm:.3g})")
        tr = np.trace(A)
        if abs(tr - 1) > HERMITIAN_TOL:
            raise NumericalInvariantError(f"correlation matrix trace is {tr}, not 1")

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def eigenvalues(self) -> np.ndarray:
        """Jacobi eigenvalues, checked for positivity and clamped into [0, 1]."""
        if self._eigenvalues is None:
            self._eigenvalues = _clamped(jacobi_eigenvalues(self.entries))
        return self._eigenvalues


def _clamped(ev: np.ndarray) -> np.ndarray:
    if ev.size and ev.min() < -PSD_TOL:
        raise NumericalInvariantError(f"negative eigenvalue {ev.min():.3g}: matrix is not PSD")
    if ev.size and ev.max() > 1 + PSD_TOL:
        raise NumericalInvariantError(f"eigenvalue {ev.max():.3g} exceeds 1")
    return np.clip(ev, 0.0, 1.0)


def _log_factor(log_base: str) -> float:
    if log_base == "bits":
        return 1 / math.log(2)
    if log_base == "nats":
        return 1.0
    raise ValueError(f"log_base must be 'bits' or 'nats', got {log_base!r}")


def _spectral_entropy(ev: np.ndarray, log_base: str = "bits") -> float:
    ev = ev[ev > 0]
    return float(-np.sum(ev * np.log(ev)) * _log_factor(log_base)) + 0.0


def correlation_matrix(X: OperationalPartition) -> CorrelationMatrix:
    """``rho[X]_ij = tau(x_j* x_i)``, evaluated literally in the algebra."""
    k = len(X)
    rho = np.empty((k, k), dtype=complex)
    stars = [adjoint(x) for x in X]
    for i, xi in enumerate(X):
        for j in range(k):
            rho[i, j] = trace_state(mul(stars[j], xi))
    return CorrelationMatrix(rho)


def von_neumann_entropy(rho: CorrelationMatrix, log_base: str = "bits") -> float:
    return _spectral_entropy(rho.eigenvalues(), log_base)


def refine(X: OperationalPartition, Y: OperationalPartition, check: bool = True) -> OperationalPartition:
    """Composition ``X o Y``: the elements ``x_i y_j`` in lexicographic ``(i, j)`` order."""
    if X.theta != Y.theta:
        raise ThetaMismatch("partitions must share theta")
    return OperationalPartition([mul(x, y) for x in X for y in Y], check=check)


def partition_spectrum(X: OperationalPartition, max_block: int = MAX_BLOCK) -> np.ndarray:
    """Nonzero spectrum of ``rho[X]`` without forming the ``k x k`` matrix.

    Monomials are orthonormal for ``tau``, so ``rho = V V^dagger`` where row
    ``i`` of ``V`` holds the coefficients of ``x_i``.  ``rho`` splits into
    blocks along connected components of the element/monomial incidence
    graph, and each block shares its nonzero spectrum with the smaller of
    ``V_b V_b^dagger`` and ``V_b^dagger V_b``.
    """
    coeffs = [x.coeffs() for x in X]
    # union-find over monomials; elements join the component of their monomials
    parent: dict = {}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for c in coeffs:
        keys = list(c)
        for key in keys:
            parent.setdefault(key, key)
        for key in keys[1:]:
            ra, rb = find(keys[0]), find(key)
            if ra != rb:
                parent[rb] = ra
    blocks: dict = defaultdict(list)
    for i, c in enumerate(coeffs):
        if c:
            blocks[find(next(iter(c)))].append(i)
    spectrum = []
    for members in blocks.values():
        mons = sorted({key for i in members for key in coeffs[i]})
        if len(mons) == 1:
            (m,) = mons
            spectrum.append(sum(abs(coeffs[i][m]) ** 2 for i in members))
            continue
        size = min(len(members), len(mons))
        if size > max_block:
            raise NumericalInvariantError(f"correlation block of size {size} exceeds {max_block}")
        col = {m: j for j, m in enumerate(mons)}
        V = np.zeros((len(members), len(mons)), dtype=complex)
        for r, i in enumerate(members):
            for m, z in coeffs[i].items():
                V[r, col[m]] = z
        G = V @ V.conj().T if len(members) <= len(mons) else V.conj().T @ V
        spectrum.extend(jacobi_eigenvalues(G))
    ev = np.array(spectrum, dtype=float)
    total = ev.sum()
    if abs(total - 1) > HERMITIAN_TOL * max(1, len(X)):
        raise NumericalInvariantError(f"correlation spectrum sums to {total}, not 1")
    return _clamped(ev)


def partition_entropy(X: OperationalPartition, log_base: str = "bits", max_block: int = MAX_BLOCK) -> float:
    """``S(rho[X])`` through the block decomposition of ``partition_spectrum``."""
    return _spectral_entropy(partition_spectrum(X, max_block), log_base)


@dataclass
class ProfileRow:
    n: int
    dim: int
    H: float
    H_over_n: float
    slope: float


@dataclass
class AFLProfile:
    matrix: SL2Matrix
    theta: Theta
    partition: str
    log_base: str
    rows: list[ProfileRow]
    n_max: int
    truncated: bool = False
    truncation_reason: str = ""
    label: str = PROFILE_LABEL

    TSV_HEADER = ("n", "dim", "H", "H_over_n", "slope")

    def to_dict(self) -> dict:
        return {
            "matrix": list(self.matrix.entries),
            "theta": str(self.theta),
            "partition": self.partition,
            "units": self.log_base,
            "n_max": self.n_max,
            "truncated": self.truncated,
            "truncation_reason": self.truncation_reason,
            "label": self.label,
            "rows": [vars(r).copy() for r in self.rows],
        }

    def tsv(self) -> str:
        lines = ["\t".join(self.TSV_HEADER)]
        for r in self.rows:
            lines.append(f"{r.n}\t{r.dim}\t{r.H!r}\t{r.H_over_n!r}\t{r.slope!r}")
        if self.truncated:
            lines.append(f"# truncated: {self.truncation_reason}")
        return "\n".join(lines)

    def slope(self, n: int) -> float:
        return next(r.slope for r in self.rows if r.n == n)


def afl_profile(
    C: SL2Matrix,
    X: OperationalPartition,
    n_max: int,
    log_base: str = "bits",
    name: str = "custom",
    max_elements: int = MAX_ELEMENTS,
    max_block: int = MAX_BLOCK,
    check: bool = True,
) -> AFLProfile:
    """``H_n = S(rho[alpha^{n-1}(X) o ... o alpha(X) o X])`` for ``n = 1..n_max``.

    The budget bounds the number of refined elements and the size of the
    largest correlation block; when either would be exceeded the profile
    stops and is marked truncated.
    """
    if n_max < 1:
        raise ValueError("n_max must be positive")
    alpha = Automorphism(C, X.theta)
    profile = AFLProfile(C, X.theta, name, log_base, [], n_max)
    image = X
    refined = X
    previous = 0.0
    for n in range(1, n_max + 1):
        if n > 1:
            if len(refined) * len(X) > max_elements:
                profile.truncated = True
                profile.truncation_reason = f"n={n} needs {len(refined) * len(X)} elements > {max_elements}"
                break
            image = OperationalPartition([alpha(x) for x in image], check=False)
            refined = refine(image, refined, check=check)
        try:
            H = partition_entropy(refined, log_base, max_block)
        except NumericalInvariantError as exc:
            if "exceeds" not in str(exc):
                raise
            profile.truncated = True
            profile.truncation_reason = f"n={n}: {exc}"
            break
        profile.rows.append(ProfileRow(n, len(refined), H, H / n, H - previous))
        previous = H
    return profile


def coarse_graining_map(X: OperationalPartition, A) -> WeylElement:
    """``Gamma_X([a_ij]) = sum_ij a_ij x_i* x_j``."""
    A = np.asarray(A, dtype=complex)
    k = len(X)
    if A.shape != (k, k):
        raise ValueError(f"expected a {k}x{k} matrix, got {A.shape}")
    stars = [adjoint(x) for x in X]
    return linear_combination(
        X.theta,
        ((A[i, j], mul(stars[i], X[j])) for i in range(k) for j in range(k) if A[i, j] != 0),
    )


BUILTIN_PARTITIONS = ("weyl2", "weyl4", "weyl8")


def builtin_partitions(theta: Theta, name: str) -> OperationalPartition:
    """Scaled-unitary partitions: ``(w_1..w_k)/sqrt(k)`` for Weyl unitaries ``w_i``."""
    exponents = {
        "weyl2": [(1, 0), (0, 1)],
        "weyl4": [(0, 0), (1, 0), (0, 1), (1, 1)],
        "weyl8": [(0, 0), (1, 0), (0, 1), (1, 1), (-1, 0), (0, -1), (2, 0), (0, 2)],
    }
    try:
        exps = exponents[name]
    except KeyError:
        raise ValueError(f"unknown partition {name!r}; choose from {BUILTIN_PARTITIONS}") from None
    scale = 1 / math.sqrt(len(exps))
    return OperationalPartition([monomial(theta, r, s, scale) for r, s in exps])
