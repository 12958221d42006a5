from dataclasses import replace
from decimal import Decimal

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from nctorus.sl2z import (
    TSV_COLUMNS,
    ConjugacyClass,
    QuadraticSurd,
    SL2Matrix,
    TraceMode,
    classify_matrix,
    iter_sl2z,
    matrix_order,
    spectral_radius,
    sweep_classify,
)

from oracles import brute_det_one, ln_spectral_radius

CAT = SL2Matrix(1, 1, 1, 2)
SMALL = list(iter_sl2z(3))

matrices = st.sampled_from(SMALL)


def test_determinant_is_enforced():
    with pytest.raises(ValueError):
        SL2Matrix(1, 1, 1, 1)
    with pytest.raises(TypeError):
        SL2Matrix(1.0, 0, 0, 1)


def test_parse_and_str():
    assert SL2Matrix.parse("1, 1,1,2") == CAT
    assert str(CAT) == "(1,1;1,2)"
    with pytest.raises(ValueError):
        SL2Matrix.parse("1,2,3")


def test_group_operations():
    assert CAT @ CAT.inverse() == SL2Matrix.identity()
    assert CAT ** 3 == CAT @ CAT @ CAT
    assert CAT ** -2 == (CAT.inverse()) ** 2
    assert CAT.transpose() == CAT


def test_cat_map_spectrum():
    r = classify_matrix(CAT)
    assert r.trace == 3 and r.chaotic
    assert r.conjugacy_class is ConjugacyClass.HYPERBOLIC
    assert (r.lambda_max.p, r.lambda_max.q, r.lambda_max.D) == (3, 1, 5)
    assert str(r.lambda_max) == "(3+√5)/2"
    assert r.matrix_order is None


def test_cat_entropy_against_mpmath():
    r = classify_matrix(CAT)
    ref = ln_spectral_radius(3)
    assert abs(r.entropy_nats - float(ref)) < 1e-15
    with mpmath.workdps(60):
        assert abs(mpmath.mpf(r.entropy_nats_decimal) - ref) < mpmath.mpf(10) ** -45
    assert r.entropy_nats_decimal.startswith("0.9624236501")
    assert abs(r.entropy_bits - float(ref / mpmath.log(2))) < 1e-15


def test_identity_and_rotation():
    ident = classify_matrix(SL2Matrix.identity())
    assert not ident.chaotic and ident.entropy_nats == 0 and ident.matrix_order == 1
    rot = classify_matrix(SL2Matrix(0, -1, 1, 0))
    assert rot.conjugacy_class is ConjugacyClass.ELLIPTIC
    assert rot.matrix_order == 4 and rot.entropy_nats == 0


def test_trace_modes_differ_only_below_minus_two():
    neg_cat = -CAT
    assert not classify_matrix(neg_cat, "positive").chaotic
    assert classify_matrix(neg_cat, "hyperbolic").chaotic
    assert classify_matrix(neg_cat, "positive").entropy_nats == 0
    assert classify_matrix(neg_cat, "hyperbolic").entropy_nats == classify_matrix(CAT).entropy_nats


def test_order_search():
    assert matrix_order(SL2Matrix(0, -1, 1, 1)) == 6
    assert matrix_order(SL2Matrix(-1, 0, 0, -1)) == 2
    assert matrix_order(SL2Matrix(1, 1, 0, 1)) is None


def test_sweep_matches_brute_force():
    for k in (0, 1, 2):
        reports = sweep_classify(k)
        assert [r.matrix.entries for r in reports] == brute_det_one(k)
    # 20 determinant-one matrices have entries in {-1, 0, 1}
    assert len(sweep_classify(1)) == 20
    assert sweep_classify(0) == []


def test_sweep_chaotic_flag_is_trace_rule():
    reports = sweep_classify(3)
    assert any(r.matrix == CAT and r.chaotic for r in reports)
    assert all(r.chaotic == (r.trace > 2) for r in reports)
    hyper = sweep_classify(3, TraceMode.HYPERBOLIC)
    assert all(r.chaotic == (abs(r.trace) > 2) for r in hyper)


def test_sweep_rejects_large_ranges():
    with pytest.raises(ValueError):
        sweep_classify(11)


def test_tsv_and_json():
    r = classify_matrix(CAT)
    row = r.tsv_row().split("\t")
    assert len(row) == len(TSV_COLUMNS)
    assert row[:6] == ["1", "1", "1", "2", "3", "hyperbolic"]
    assert row[6] == "infinite" and row[-1] == "true"
    d = r.to_dict()
    assert d["lambda_surd"] == {"p": 3, "q": 1, "D": 5}
    assert d["order"] == "infinite"


def test_squarefree_extraction():
    # t = 6: t^2 - 4 = 32 = 4^2 * 2
    lam = spectral_radius(6)
    assert (lam.p, lam.q, lam.D) == (6, 4, 2)
    assert spectral_radius(2) == QuadraticSurd(2, 0, 0)


@given(matrices)
def test_eigenvalue_product_and_sum(C):
    lam = spectral_radius(C.trace)
    if abs(C.trace) <= 2:
        return
    # exact: ((p + q sqrt D)/2) ((p - q sqrt D)/2) = (p^2 - q^2 D)/4
    assert lam.p * lam.p - lam.q * lam.q * lam.D == 4
    assert lam.p == abs(C.trace)
    hi, lo = lam.decimal(), lam.conjugate().decimal()
    assert abs(hi * lo - 1) < Decimal("1e-12")
    assert abs(hi + lo - abs(C.trace)) < Decimal("1e-12")


@given(matrices, matrices)
def test_conjugation_invariance(C, G):
    a = classify_matrix(C)
    b = classify_matrix(G @ C @ G.inverse())
    assert (a.trace, a.conjugacy_class, a.entropy_nats) == (b.trace, b.conjugacy_class, b.entropy_nats)


@given(matrices)
def test_modes_agree_above_minus_two(C):
    if C.trace >= -2:
        hyper = classify_matrix(C, "hyperbolic")
        assert classify_matrix(C, "positive") == replace(hyper, trace_mode=TraceMode.POSITIVE)


@given(matrices)
def test_entropy_zero_iff_not_hyperbolic(C):
    r = classify_matrix(C, "hyperbolic")
    assert (r.entropy_nats == 0) == (r.conjugacy_class is not ConjugacyClass.HYPERBOLIC)


@settings(max_examples=50)
@given(st.integers(3, 400))
def test_entropy_decimal_matches_mpmath(t):
    C = SL2Matrix(t, -1, 1, 0)
    r = classify_matrix(C)
    with mpmath.workdps(60):
        assert abs(mpmath.mpf(r.entropy_nats_decimal) - ln_spectral_radius(t)) < mpmath.mpf(10) ** -45


def test_trace_mode_alias():
    assert TraceMode("paper") is TraceMode.POSITIVE
    with pytest.raises(ValueError):
        TraceMode("elliptic")
