"""Shannon, block and compression-rate entropy estimates from symbolic data."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from statistics import fmean
from typing import Sequence

import numpy as np

from .classical import (
    DEFAULT_PRECISION,
    GridPartition,
    SymbolicWord,
    itinerary_array,
    required_precision,
    to_binary,
    trajectory_words,
)
from .errors import BudgetExceeded
from .sl2z import SL2Matrix

BLOCK_BUDGET = 1 << 26
MIN_BRUDNO_LENGTH = 1024
STOCHASTIC_TOL = 1e-12
BRUDNO_LABEL = "LZ78 compression proxy (upper bound)"


def _scale(base: str) -> float:
    if base == "bits":
        return 1.0
    if base == "nats":
        return math.log(2)
    raise ValueError(f"base must be 'bits' or 'nats', got {base!r}")


class StochasticVector(tuple):
    def __new__(cls, probabilities: Sequence[float]):
        p = tuple(float(x) for x in probabilities)
        if any(x < 0 for x in p):
            raise ValueError("probabilities must be non-negative")
        if abs(math.fsum(p) - 1) > STOCHASTIC_TOL:
            raise ValueError(f"probabilities sum to {math.fsum(p)!r}, not 1")
        return super().__new__(cls, p)


def shannon_entropy(p: Sequence[float], base: str = "bits") -> float:
    p = StochasticVector(p)
    return -math.fsum(x * math.log2(x) for x in p if x > 0) * _scale(base) + 0.0


def _counts_entropy_bits(counts: np.ndarray, total: int) -> float:
    p = counts[counts > 0] / total
    return float(-np.sum(p * np.log2(p))) + 0.0


@dataclass
class BlockRow:
    n: int
    H: float
    H_over_n: float
    increment: float
    observed_blocks: int


@dataclass
class BlockEntropyProfile:
    matrix: SL2Matrix
    m: int
    samples: int
    seed: int
    precision: int
    miller_madow: bool
    units: str
    rows: list[BlockRow] = field(default_factory=list)

    TSV_HEADER = ("n", "H", "H_over_n", "increment", "observed_blocks")

    @property
    def notes(self) -> list[str]:
        out = [
            "plug-in frequency estimator over independent words; biased low once observed blocks approach the sample count",
        ]
        if self.miller_madow:
            out.append("Miller-Madow correction (observed-1)/(2M) nats added")
        return out

    def rate(self, n: int) -> float:
        return next(r.H_over_n for r in self.rows if r.n == n)

    def to_dict(self) -> dict:
        return {
            "matrix": list(self.matrix.entries),
            "grid": self.m,
            "samples": self.samples,
            "seed": self.seed,
            "precision": self.precision,
            "miller_madow": self.miller_madow,
            "units": self.units,
            "notes": self.notes,
            "rows": [vars(r).copy() for r in self.rows],
        }

    def tsv(self) -> str:
        lines = ["\t".join(self.TSV_HEADER)]
        lines += [f"{r.n}\t{r.H!r}\t{r.H_over_n!r}\t{r.increment!r}\t{r.observed_blocks}" for r in self.rows]
        return "\n".join(lines)


def block_entropy_profile(
    C: SL2Matrix,
    A: GridPartition,
    M: int,
    n_max: int,
    precision: int = DEFAULT_PRECISION,
    seed: int = 0,
    miller_madow: bool = False,
    base: str = "bits",
    action: str = "transpose",
) -> BlockEntropyProfile:
    """Empirical ``H_n`` of the first ``n`` symbols of ``M`` length-``n_max`` words."""
    if M < 1 or n_max < 1:
        raise ValueError("M and n_max must be positive")
    alphabet = A.size
    if alphabet ** n_max > BLOCK_BUDGET:
        raise BudgetExceeded(
            f"{alphabet}^{n_max} blocks exceed the {BLOCK_BUDGET} counter budget; lower n_max or the grid size"
        )
    words = itinerary_array(C, A, n_max, M, seed, precision, action)
    profile = BlockEntropyProfile(C, A.m, M, seed, precision, miller_madow, base)
    codes = np.zeros(M, dtype=np.int64)
    previous = 0.0
    scale = _scale(base)
    for n in range(1, n_max + 1):
        codes = codes * alphabet + words[:, n - 1]
        _, counts = np.unique(codes, return_counts=True)
        H = _counts_entropy_bits(counts, M)
        if miller_madow:
            H += (len(counts) - 1) / (2 * M * math.log(2))
        H *= scale
        profile.rows.append(BlockRow(n, H, H / n, H - previous, len(counts)))
        previous = H
    return profile


def lz78_phrase_count(w: SymbolicWord | Sequence[int]) -> int:
    """Phrases in the incremental parse; an unfinished final phrase counts as one."""
    children: dict[tuple[int, int], int] = {}
    node, phrases = 0, 0
    for d in w:
        nxt = children.get((node, d))
        if nxt is None:
            phrases += 1
            children[(node, d)] = len(children) + 1
            node = 0
        else:
            node = nxt
    return phrases + (node != 0)


def brudno_rate(w: SymbolicWord) -> float:
    """LZ78 code length per symbol, ``c (log2 c + log2 |alphabet|) / |w|``, in bits."""
    if len(w) < MIN_BRUDNO_LENGTH:
        raise ValueError(f"word of length {len(w)} is shorter than {MIN_BRUDNO_LENGTH}")
    c = lz78_phrase_count(w)
    if c == 0:
        return 0.0
    return c * (math.log2(c) + math.log2(w.alphabet_size)) / len(w)


@dataclass
class BrudnoEstimate:
    matrix: SL2Matrix
    m: int
    length: int
    seeds: int
    seed: int
    precision: int
    symbol_rates: list[float]
    binary_rates: list[float]
    label: str = BRUDNO_LABEL

    @property
    def mean_symbol_rate(self) -> float:
        return fmean(self.symbol_rates)

    @property
    def mean_binary_rate(self) -> float:
        return fmean(self.binary_rates)

    def to_dict(self) -> dict:
        return {
            "matrix": list(self.matrix.entries),
            "grid": self.m,
            "length": self.length,
            "seeds": self.seeds,
            "seed": self.seed,
            "precision": self.precision,
            "label": self.label,
            "mean_rate_per_binary_digit": self.mean_binary_rate,
            "mean_rate_per_symbol": self.mean_symbol_rate,
            "binary_rates": self.binary_rates,
            "symbol_rates": self.symbol_rates,
        }


def trajectory_brudno(
    C: SL2Matrix,
    A: GridPartition,
    length: int,
    seeds: int,
    seed: int = 0,
    precision: int | None = None,
    action: str = "transpose",
) -> BrudnoEstimate:
    """Compression rates of orbit words, raw and after conversion to base 2.

    The base-2 rate is the primary figure: each word is read as an
    ``m^2``-adic number and rewritten in binary before parsing.  The raw
    rate over the ``m^2``-letter alphabet is reported alongside.
    ``precision=None`` uses the smallest trustworthy precision (at least
    the default).
    """
    if precision is None:
        precision = max(DEFAULT_PRECISION, required_precision(C, length))
    words = trajectory_words(C, A, length, seeds, seed, precision, action)
    return BrudnoEstimate(
        C,
        A.m,
        length,
        seeds,
        seed,
        precision,
        [brudno_rate(w) for w in words],
        [brudno_rate(to_binary(w)) for w in words],
    )
