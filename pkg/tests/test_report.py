import json

import pytest
from hypothesis import given, settings, strategies as st

from nctorus.report import (
    DISJOINTNESS_THEOREM,
    ClassificationVerdict,
    EvidenceOptions,
    Tag,
    Verdict,
    classify_automorphism,
)
from nctorus.sl2z import SL2Matrix, iter_sl2z
from nctorus.weyl import Theta

GOLDEN = Theta.golden()
CAT = SL2Matrix(1, 1, 1, 2)


def tags(v):
    return {c.tag for c in v.rationale}


def test_cat_is_chaotic_and_shallow():
    v = classify_automorphism(CAT, GOLDEN)
    assert v.verdict is Verdict.CHAOTIC_SHALLOW
    assert tags(v) == {Tag.ENTROPY_FORMULA, Tag.CHAOTIC_SET, Tag.CHAOTIC_SHALLOW}
    assert any(DISJOINTNESS_THEOREM in c.statement for c in v.rationale)
    assert v.evidence == {} and v.warnings == []


def test_finite_order_is_shallow_without_evidence():
    v = classify_automorphism(SL2Matrix(0, -1, 1, 0), GOLDEN)
    assert v.verdict is Verdict.FINITE_ORDER_SHALLOW
    assert Tag.TOY_DEPTH in tags(v) and v.evidence == {}


def test_parabolic_gathers_evidence():
    v = classify_automorphism(SL2Matrix(1, 1, 0, 1), GOLDEN)
    assert v.verdict is Verdict.PARABOLIC_INDETERMINATE
    assert set(v.evidence) == {"afl", "brudno", "depth"}
    assert "proxy" in v.evidence["brudno"]["label"]
    assert Tag.TOY_DEPTH in tags(v)


def test_negative_trace_depends_on_convention():
    neg = -CAT
    positive = classify_automorphism(neg, GOLDEN)
    assert positive.verdict is Verdict.INDETERMINATE and positive.evidence
    hyper = classify_automorphism(neg, GOLDEN, trace_mode="hyperbolic")
    assert hyper.verdict is Verdict.CHAOTIC_SHALLOW


def test_rational_theta_warns():
    v = classify_automorphism(CAT, Theta.rational(1, 5))
    assert v.warnings and "rational" in v.warnings[0]


def test_forced_evidence_and_serialization():
    v = classify_automorphism(CAT, GOLDEN, EvidenceOptions(always_gather=True))
    assert v.evidence["afl"]["rows"][-1]["H"] > v.evidence["afl"]["rows"][0]["H"]
    d = json.loads(json.dumps(v.to_dict()))
    assert d["verdict"] == "chaotic_shallow" and d["matrix"] == [1, 1, 1, 2]
    row = v.tsv_row().split("\t")
    assert len(row) == len(ClassificationVerdict.TSV_HEADER)
    assert row[8] == "chaotic_shallow"


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(list(iter_sl2z(3))))
def test_verdict_follows_spectral_class(C):
    v = classify_automorphism(C, GOLDEN, EvidenceOptions(brudno_length=1024, brudno_seeds=1, afl_nmax=2))
    assert (v.verdict is Verdict.CHAOTIC_SHALLOW) == (C.trace > 2)
    if C.trace > 2:
        assert v.verdict not in (Verdict.INDETERMINATE, Verdict.PARABOLIC_INDETERMINATE)
    assert all(isinstance(c.tag, Tag) for c in v.rationale)
