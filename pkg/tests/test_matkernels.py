import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from numpy.testing import assert_allclose

from bwrank.utils.errors import (
    DimensionMismatchError,
    NonFiniteError,
    NotPositiveDefiniteError,
    NotPositiveSemidefiniteError,
)
from bwrank.utils.matkernels import (
    SpdMatrix,
    SymMatrix,
    fix_column_signs,
    polar_orthogonal,
    psd_sqrt,
    random_orthogonal,
    sylvester_solve,
    sym_eig,
    thin_svd,
)
from bwrank.utils.samplers import random_spd, random_sym
from conftest import kron_sylvester, seeds

finite = st.floats(min_value=-10.0, max_value=10.0, allow_nan=False, allow_infinity=False)


def test_sym_matrix_symmetrizes():
    S = SymMatrix([[1.0, 2.0], [0.0, 1.0]])
    assert_allclose(S.entries, [[1.0, 1.0], [1.0, 1.0]])
    assert S.dim == 2


def test_sym_matrix_rejects_non_square_and_nan():
    with pytest.raises(DimensionMismatchError):
        SymMatrix(np.zeros((2, 3)))
    with pytest.raises(NonFiniteError):
        SymMatrix([[np.nan, 0.0], [0.0, 1.0]])


def test_spd_rejects_singular_and_indefinite():
    with pytest.raises(NotPositiveDefiniteError) as info:
        SpdMatrix(np.diag([1.0, 0.0]))
    assert info.value.eigenvalue == pytest.approx(0.0)
    with pytest.raises(NotPositiveDefiniteError):
        SpdMatrix(np.diag([1.0, -0.5]))


def test_spd_inverse():
    D = SpdMatrix([[2.0, 0.5], [0.5, 1.0]])
    assert_allclose(D.inverse @ D.entries, np.eye(2), atol=1e-14)


@given(seed=seeds, k=st.integers(min_value=1, max_value=5))
@settings(max_examples=40, deadline=None)
def test_sylvester_matches_kronecker_oracle(seed, k):
    rng = np.random.default_rng(seed)
    D, T = random_spd(rng, k), random_sym(rng, k)
    S = sylvester_solve(D, T).entries
    assert_allclose(S, kron_sylvester(D.entries, T.entries), atol=1e-10)
    assert_allclose(D.entries @ S + S @ D.entries, T.entries, atol=1e-10)
    assert_allclose(S, S.T, atol=0.0)


def test_sylvester_identity_halves():
    T = np.array([[1.0, 2.0], [2.0, -4.0]])
    assert_allclose(sylvester_solve(np.eye(2), T).entries, T / 2.0, atol=1e-15)


@given(seed=seeds, k=st.integers(min_value=1, max_value=5))
@settings(max_examples=30, deadline=None)
def test_sylvester_equivariant_and_self_adjoint(seed, k):
    rng = np.random.default_rng(seed)
    D, T1, T2 = random_spd(rng, k), random_sym(rng, k).entries, random_sym(rng, k).entries
    G = random_orthogonal(k, seed % 1000, 1)
    lhs = sylvester_solve(G.T @ D.entries @ G, G.T @ T1 @ G).entries
    assert_allclose(lhs, G.T @ sylvester_solve(D, T1).entries @ G, atol=1e-10)
    a = np.trace(sylvester_solve(D, T1).entries @ T2)
    b = np.trace(T1 @ sylvester_solve(D, T2).entries)
    assert a == pytest.approx(b, abs=1e-10)


def test_sylvester_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        sylvester_solve(np.eye(2), np.eye(3))


@given(A=st.integers(min_value=1, max_value=6).flatmap(lambda k: arrays(np.float64, (k, k), elements=finite)))
@settings(max_examples=50, deadline=None)
def test_sym_eig_reconstructs_with_sign_convention(A):
    A = 0.5 * (A + A.T)
    pair = sym_eig(A)
    assert np.all(np.diff(pair.values) >= -1e-12)
    assert_allclose((pair.vectors * pair.values) @ pair.vectors.T, A, atol=1e-9 * (1.0 + np.linalg.norm(A)))
    pivots = np.argmax(np.abs(pair.vectors), axis=0)
    assert np.all(pair.vectors[pivots, np.arange(A.shape[0])] > 0)


def test_fix_column_signs_reports_flips():
    V = np.array([[0.6, -0.8], [-0.8, -0.6]])
    flipped, signs = fix_column_signs(V)
    assert_allclose(signs, [-1.0, -1.0])
    assert_allclose(flipped, -V)


def test_psd_sqrt_diagonal_and_rank_deficient():
    assert_allclose(psd_sqrt(np.diag([4.0, 9.0, 0.0])).entries, np.diag([2.0, 3.0, 0.0]), atol=1e-15)


def test_psd_sqrt_clamps_roundoff_but_rejects_negative():
    roundoff = np.diag([1.0, -1e-14])
    assert_allclose(psd_sqrt(roundoff).entries, np.diag([1.0, 0.0]), atol=1e-15)
    with pytest.raises(NotPositiveSemidefiniteError):
        psd_sqrt(np.diag([1.0, -1e-3]))


@given(seed=seeds, k=st.integers(min_value=1, max_value=5))
@settings(max_examples=30, deadline=None)
def test_psd_sqrt_squares_back(seed, k):
    R0 = random_spd(np.random.default_rng(seed), k).entries
    assert_allclose(psd_sqrt(R0 @ R0).entries, R0, atol=1e-8)


def test_thin_svd_reconstructs(rng):
    A = rng.standard_normal((6, 3))
    U, sigma, V = thin_svd(A)
    assert U.shape == (6, 3) and V.shape == (3, 3)
    assert np.all(np.diff(sigma) <= 0)
    assert_allclose((U * sigma) @ V.T, A, atol=1e-13)


def test_thin_svd_rejects_wide_matrix():
    with pytest.raises(DimensionMismatchError):
        thin_svd(np.zeros((2, 3)))


@pytest.mark.parametrize("det_sign", [1, -1])
def test_random_orthogonal_component(det_sign):
    Q = random_orthogonal(4, seed=3, det_sign=det_sign)
    assert_allclose(Q.T @ Q, np.eye(4), atol=1e-14)
    assert np.sign(np.linalg.det(Q)) == det_sign
    assert_allclose(Q, random_orthogonal(4, seed=3, det_sign=det_sign))


def test_random_orthogonal_empty_group():
    assert random_orthogonal(0, seed=1).shape == (0, 0)


def test_polar_orthogonal_of_perturbed_rotation():
    Q = random_orthogonal(3, seed=5)
    U = polar_orthogonal(Q + 1e-9 * np.ones((3, 3)))
    assert_allclose(U.T @ U, np.eye(3), atol=1e-14)
    assert_allclose(U, Q, atol=1e-8)
