import math
from collections import Counter
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nctorus.afl import (
    CorrelationMatrix,
    OperationalPartition,
    PartitionError,
    afl_profile,
    builtin_partitions,
    coarse_graining_map,
    correlation_matrix,
    partition_entropy,
    partition_spectrum,
    refine,
    von_neumann_entropy,
)
from nctorus.eigen import jacobi_eigenvalues
from nctorus.errors import NumericalInvariantError
from nctorus.sl2z import SL2Matrix, iter_sl2z
from nctorus.weyl import Automorphism, Theta, identity, monomial

from oracles import cubic_hermitian_eigenvalues

FIFTH = Theta.rational(1, 5)
GOLDEN = Theta.golden()
CAT = SL2Matrix(1, 1, 1, 2)
IDENT = SL2Matrix.identity()
R2 = 1 / math.sqrt(2)


def identity_weyl2_entropy(n: int) -> float:
    """Closed form for the n-fold refinement of (u, v)/sqrt 2 under the identity."""
    return n - sum(comb(n, j) * math.log2(comb(n, j)) for j in range(n + 1)) / 2**n


# ---------------------------------------------------------------- eigensolver


def test_jacobi_matches_numpy_on_random_hermitian():
    rng = np.random.default_rng(0)
    for n in (1, 2, 5, 17, 40):
        A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        H = A + A.conj().T
        assert np.allclose(jacobi_eigenvalues(H), np.linalg.eigvalsh(H), atol=1e-10)


def test_jacobi_cubic_oracle():
    rng = np.random.default_rng(1)
    for _ in range(200):
        A = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        H = A @ A.conj().T
        H /= np.trace(H).real
        assert np.allclose(jacobi_eigenvalues(H), cubic_hermitian_eigenvalues(H), atol=1e-8)


def test_jacobi_rejects_non_square():
    with pytest.raises(ValueError):
        jacobi_eigenvalues(np.zeros((2, 3)))


# ---------------------------------------------------------------- partitions and correlation matrices


def test_partition_of_unity_is_checked():
    OperationalPartition([identity(FIFTH)])
    with pytest.raises(PartitionError):
        OperationalPartition([monomial(FIFTH, 1, 0), monomial(FIFTH, 0, 1)])


def test_correlation_examples():
    halves = OperationalPartition([identity(FIFTH).scale(R2)] * 2)
    assert np.allclose(correlation_matrix(halves).entries, [[0.5, 0.5], [0.5, 0.5]])
    assert von_neumann_entropy(correlation_matrix(halves)) == pytest.approx(0, abs=1e-12)
    weyl2 = builtin_partitions(FIFTH, "weyl2")
    rho = correlation_matrix(weyl2)
    assert np.allclose(rho.entries, np.eye(2) / 2)
    assert von_neumann_entropy(rho) == pytest.approx(1, abs=1e-12)
    assert von_neumann_entropy(rho, "nats") == pytest.approx(math.log(2), abs=1e-12)


def test_refined_identity_block():
    X = builtin_partitions(FIFTH, "weyl2")
    XX = refine(X, X)
    assert [x.support() for x in XX] == [{(2, 0)}, {(1, 1)}, {(1, 1)}, {(0, 2)}]
    rho = correlation_matrix(XX)
    block = rho.entries[1:3, 1:3]
    phase = np.exp(2j * np.pi / 5)
    assert np.allclose(block, [[0.25, np.conj(phase) / 4], [phase / 4, 0.25]])
    assert np.allclose(rho.eigenvalues(), [0, 0.25, 0.25, 0.5], atol=1e-12)
    assert von_neumann_entropy(rho) == pytest.approx(1.5, abs=1e-12)


def test_refine_neutral_and_size():
    X = builtin_partitions(GOLDEN, "weyl4")
    single = OperationalPartition([identity(GOLDEN)])
    assert all(a.allclose(b) for a, b in zip(refine(X, single), X))
    assert len(refine(X, builtin_partitions(GOLDEN, "weyl2"))) == 8


def test_builtin_partitions():
    for theta in (FIFTH, GOLDEN):
        assert len(builtin_partitions(theta, "weyl4")) == 4
        rho = correlation_matrix(builtin_partitions(theta, "weyl8"))
        assert np.allclose(rho.entries, np.eye(8) / 8)
    with pytest.raises(ValueError):
        builtin_partitions(FIFTH, "weyl3")


def test_correlation_matrix_invariants_enforced():
    with pytest.raises(NumericalInvariantError):
        CorrelationMatrix(np.array([[0.5, 1], [0, 0.5]]))
    with pytest.raises(NumericalInvariantError):
        CorrelationMatrix(np.eye(2))
    with pytest.raises(NumericalInvariantError):
        CorrelationMatrix(np.array([[1.5, 0], [0, -0.5]])).eigenvalues()


def test_coarse_graining_map():
    X = builtin_partitions(GOLDEN, "weyl4")
    assert coarse_graining_map(X, np.eye(4)).allclose(identity(GOLDEN))
    assert coarse_graining_map(X, np.zeros((4, 4))).coeffs() == {}
    halves = OperationalPartition([identity(GOLDEN).scale(R2)] * 2)
    assert coarse_graining_map(halves, [[0, 1], [0, 0]]).allclose(identity(GOLDEN).scale(0.5))


def test_structured_spectrum_matches_literal_matrix():
    X = builtin_partitions(GOLDEN, "weyl4")
    Y = refine(refine(X, X), builtin_partitions(GOLDEN, "weyl2"))
    literal = correlation_matrix(Y).eigenvalues()
    structured = partition_spectrum(Y)
    nonzero = np.sort(literal[literal > 1e-12])
    assert np.allclose(np.sort(structured[structured > 1e-12]), nonzero, atol=1e-10)


# ---------------------------------------------------------------- profiles


def test_profile_examples():
    X = builtin_partitions(GOLDEN, "weyl2")
    ident = afl_profile(IDENT, X, 2)
    cat = afl_profile(CAT, X, 2)
    assert ident.rows[0].H == pytest.approx(1, abs=1e-12)
    assert ident.rows[1].H == pytest.approx(1.5, abs=1e-12)
    assert cat.rows[1].H == pytest.approx(2, abs=1e-12)
    assert cat.rows[1].slope == pytest.approx(1, abs=1e-12)


@pytest.mark.parametrize("theta", [FIFTH, GOLDEN])
def test_identity_closed_form(theta):
    X = builtin_partitions(theta, "weyl2")
    profile = afl_profile(IDENT, X, 6)
    for row in profile.rows:
        assert row.H == pytest.approx(identity_weyl2_entropy(row.n), abs=1e-8)
    spectrum = np.sort(partition_spectrum(_refined(IDENT, X, 6)))
    expected = np.sort([comb(6, j) / 64 for j in range(7)])
    assert np.allclose(spectrum[spectrum > 1e-12], expected, atol=1e-8)


def _refined(C, X, n):
    alpha, image, out = Automorphism(C, X.theta), X, X
    for _ in range(n - 1):
        image = OperationalPartition([alpha(x) for x in image], check=False)
        out = refine(image, out)
    return out


def exponent_class_entropy(exponents, n: int) -> float:
    """Under the identity every refined element is a scaled monomial, so the
    nonzero spectrum is the law of a sum of n uniform draws from the exponents."""
    dist = Counter({(0, 0): 1})
    for _ in range(n):
        nxt = Counter()
        for (r, s), count in dist.items():
            for a, b in exponents:
                nxt[(r + a, s + b)] += count
        dist = nxt
    total = len(exponents) ** n
    return -sum(c / total * math.log2(c / total) for c in dist.values())


WEYL8 = [(0, 0), (1, 0), (0, 1), (1, 1), (-1, 0), (0, -1), (2, 0), (0, 2)]


@pytest.mark.parametrize("theta", [FIFTH, GOLDEN])
def test_weyl8_profiles(theta):
    X = builtin_partitions(theta, "weyl8")
    ident = [r.H for r in afl_profile(IDENT, X, 4).rows]
    assert ident == pytest.approx([exponent_class_entropy(WEYL8, n) for n in range(1, 5)], abs=1e-10)
    # regression values frozen from the block spectrum
    cat = [r.H for r in afl_profile(CAT, X, 4).rows]
    assert cat == pytest.approx([3.0, 4.929229297, 6.438629461, 7.854568175], abs=1e-8)


def test_profile_truncation():
    X = builtin_partitions(FIFTH, "weyl4")
    profile = afl_profile(CAT, X, 6, max_elements=100)
    assert profile.truncated and len(profile.rows) == 3
    assert "truncated" in profile.tsv()
    assert profile.to_dict()["truncated"] is True


def test_profile_serialization():
    profile = afl_profile(CAT, builtin_partitions(FIFTH, "weyl2"), 3, log_base="nats")
    lines = profile.tsv().splitlines()
    assert lines[0] == "n\tdim\tH\tH_over_n\tslope"
    assert len(lines) == 4
    assert profile.to_dict()["units"] == "nats"
    assert "lower-bound" in profile.label


# ---------------------------------------------------------------- properties

small_matrices = st.sampled_from(list(iter_sl2z(3)))
partition_names = st.sampled_from(["weyl2", "weyl4", "weyl8"])


@settings(max_examples=25, deadline=None)
@given(small_matrices, partition_names, st.sampled_from([FIFTH, GOLDEN]))
def test_entropy_bounds_and_monotonicity(C, name, theta):
    X = builtin_partitions(theta, name)
    profile = afl_profile(C, X, 3 if name != "weyl8" else 2)
    k = len(X)
    previous = 0.0
    for row in profile.rows:
        assert row.H <= row.n * math.log2(k) + 1e-9
        assert row.H >= previous - 1e-9
        previous = row.H


@settings(max_examples=25, deadline=None)
@given(partition_names, st.data())
def test_refinement_never_lowers_entropy(name, data):
    X = builtin_partitions(GOLDEN, name)
    Y = builtin_partitions(GOLDEN, data.draw(partition_names))
    assert partition_entropy(refine(X, Y)) >= partition_entropy(X) - 1e-9


@settings(max_examples=25, deadline=None)
@given(st.permutations(range(8)), st.floats(0, 2 * math.pi), st.integers(0, 7))
def test_permutation_and_phase_invariance(perm, angle, index):
    base = refine(builtin_partitions(FIFTH, "weyl2"), builtin_partitions(FIFTH, "weyl4"))
    H = von_neumann_entropy(correlation_matrix(base))
    permuted = OperationalPartition([base[i] for i in perm])
    assert von_neumann_entropy(correlation_matrix(permuted)) == pytest.approx(H, abs=1e-10)
    phased = list(base)
    phased[index] = phased[index].scale(complex(math.cos(angle), math.sin(angle)))
    assert von_neumann_entropy(correlation_matrix(OperationalPartition(phased))) == pytest.approx(H, abs=1e-10)


@settings(max_examples=20, deadline=None)
@given(small_matrices)
def test_correlation_trace_is_one(C):
    X = _refined(C, builtin_partitions(GOLDEN, "weyl4"), 2)
    assert np.trace(correlation_matrix(X).entries) == pytest.approx(1, abs=1e-10)
