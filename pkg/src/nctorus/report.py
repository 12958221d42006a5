"""Chaotic / non-chaotic classification of torus automorphisms with supporting evidence."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

from .afl import afl_profile, builtin_partitions
from .classical import GridPartition, to_binary, trajectory_words
from .depth import logical_depth, program_table
from .entropy import trajectory_brudno
from .sl2z import ConjugacyClass, SL2Matrix, SpectralReport, TraceMode, classify_matrix
from .weyl import Theta

DISJOINTNESS_THEOREM = "Quantum chaoticity implies quantum shallowness"


class Verdict(str, enum.Enum):
    CHAOTIC_SHALLOW = "chaotic_shallow"
    FINITE_ORDER_SHALLOW = "nonchaotic_finite_order_shallow"
    PARABOLIC_INDETERMINATE = "nonchaotic_parabolic_indeterminate"
    INDETERMINATE = "nonchaotic_indeterminate"


class Tag(str, enum.Enum):
    ENTROPY_FORMULA = "afl-cnt-ks-formula"
    CHAOTIC_SHALLOW = "chaotic-implies-shallow"
    CHAOTIC_SET = "corollary-chaotic-set"
    BRUDNO_PROXY = "brudno-proxy"
    TOY_DEPTH = "toy-depth"


@dataclass(frozen=True)
class Citation:
    tag: Tag
    statement: str

    def to_dict(self) -> dict:
        return {"tag": self.tag.value, "statement": self.statement}


@dataclass(frozen=True)
class EvidenceOptions:
    afl_partition: str = "weyl2"
    afl_nmax: int = 4
    brudno_grid: int = 4
    brudno_length: int = 4096
    brudno_seeds: int = 2
    depth_grid: int = 2
    depth_length: int = 8
    depth_significance: int = 2
    depth_max_prog_len: int = 18
    depth_budget: int = 4096
    seed: int = 0
    always_gather: bool = False


@dataclass
class ClassificationVerdict:
    matrix: SL2Matrix
    theta: Theta
    spectral: SpectralReport
    verdict: Verdict
    rationale: list[Citation]
    evidence: dict = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    TSV_HEADER = ("a", "b", "c", "d", "trace", "class", "lambda", "entropy_nats", "verdict", "tags")

    def to_dict(self) -> dict:
        return {
            "matrix": list(self.matrix.entries),
            "theta": str(self.theta),
            "spectral": self.spectral.to_dict(),
            "verdict": self.verdict.value,
            "rationale": [c.to_dict() for c in self.rationale],
            "evidence": self.evidence,
            "warnings": self.warnings,
        }

    def tsv_row(self) -> str:
        s = self.spectral
        return "\t".join(map(str, (
            *self.matrix.entries, s.trace, s.conjugacy_class.value, s.lambda_max,
            repr(s.entropy_nats), self.verdict.value, ",".join(c.tag.value for c in self.rationale),
        )))


def _entropy_citation(s: SpectralReport) -> Citation:
    return Citation(
        Tag.ENTROPY_FORMULA,
        f"entropy formula ({s.trace_mode.value} trace convention) gives {s.entropy_nats_decimal} nats",
    )


def gather_evidence(C: SL2Matrix, theta: Theta, options: EvidenceOptions) -> dict:
    """AFL profile, Brudno proxy and a depth bracket for one automorphism."""
    X = builtin_partitions(theta, options.afl_partition)
    profile = afl_profile(C, X, options.afl_nmax, name=options.afl_partition)
    brudno = trajectory_brudno(
        C, GridPartition(options.brudno_grid), options.brudno_length, options.brudno_seeds, options.seed
    )
    (word,) = trajectory_words(
        C, GridPartition(options.depth_grid), options.depth_length, 1, options.seed, precision="auto"
    )
    bits = to_binary(word).bits()[: options.depth_length]
    table = program_table(options.depth_max_prog_len, options.depth_budget)
    bracket = logical_depth(
        bits, options.depth_significance, options.depth_max_prog_len, options.depth_budget, table
    )
    return {"afl": profile.to_dict(), "brudno": brudno.to_dict(), "depth": bracket.to_dict()}


def classify_automorphism(
    C: SL2Matrix,
    theta: Theta,
    options: Optional[EvidenceOptions] = None,
    trace_mode: TraceMode | str = TraceMode.POSITIVE,
) -> ClassificationVerdict:
    """Verdict from the spectral report alone; evidence is gathered only where no theorem settles the case."""
    options = options or EvidenceOptions()
    s = classify_matrix(C, trace_mode)
    warnings = []
    if theta.is_rational:
        warnings.append(f"theta = {theta} is rational; results describe the rational rotation algebra")
    rationale = [_entropy_citation(s)]
    needs_evidence = options.always_gather
    if s.chaotic:
        verdict = Verdict.CHAOTIC_SHALLOW
        rationale += [
            Citation(Tag.CHAOTIC_SET, "the chaotic automorphisms of the torus are exactly those with trace > 2"),
            Citation(Tag.CHAOTIC_SHALLOW, f"{DISJOINTNESS_THEOREM}: no chaotic automorphism is complex"),
        ]
    elif s.matrix_order is not None:
        verdict = Verdict.FINITE_ORDER_SHALLOW
        rationale.append(Citation(
            Tag.TOY_DEPTH,
            f"C has order {s.matrix_order}: every orbit is periodic, so symbolic words are eventually periodic and shallow",
        ))
    elif s.conjugacy_class is ConjugacyClass.PARABOLIC:
        verdict = Verdict.PARABOLIC_INDETERMINATE
        rationale.append(Citation(
            Tag.BRUDNO_PROXY,
            "zero entropy and infinite order: no available criterion certifies depth, evidence attached",
        ))
        needs_evidence = True
    else:
        verdict = Verdict.INDETERMINATE
        rationale.append(Citation(
            Tag.CHAOTIC_SET,
            f"trace {s.trace} lies outside the chaotic set for the {s.trace_mode.value} trace convention",
        ))
        needs_evidence = True
    evidence = gather_evidence(C, theta, options) if needs_evidence else {}
    if evidence and all(c.tag is not Tag.TOY_DEPTH for c in rationale):
        rationale.append(Citation(Tag.TOY_DEPTH, "depth bracket is relative to the toy prefix machine"))
    return ClassificationVerdict(C, theta, s, verdict, rationale, evidence, warnings)
