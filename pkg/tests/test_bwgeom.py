import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from bwrank.utils.bwgeom import (
    AmbientTangent,
    PsdFixedRank,
    ambient_metric,
    bundle_metric,
    bw_distance,
    bw_distance_procrustes,
    dphi,
    dphi_inv,
    dphi_total,
    metric_split,
    phi,
    phi_inv,
    psd_factor,
)
from bwrank.utils.errors import NotPositiveSemidefiniteError, RankError, TangencyError
from bwrank.utils.manifolds import BundlePoint, BundleTangent, gauge_direction, group_act
from bwrank.utils.samplers import (
    random_bundle_point,
    random_bundle_tangent,
    random_full_rank,
    random_orthogonal_matrix,
)
from conftest import seeds, shapes


def test_phi_is_qdqt():
    P = BundlePoint.from_arrays(np.eye(3)[:, :2], np.diag([2.0, 1.0]))
    assert_allclose(phi(P).Sigma, np.diag([2.0, 1.0, 0.0]))


@given(seed=seeds, shape=shapes)
@settings(max_examples=30, deadline=None)
def test_phi_inverse_roundtrips(seed, shape):
    n, k = shape
    rng = np.random.default_rng(seed)
    X = random_full_rank(rng, n, k)
    Sigma = X @ X.T
    assert_allclose(phi(phi_inv(Sigma, k=k)).Sigma, Sigma, atol=1e-10 * (1 + np.linalg.norm(Sigma)))
    P = random_bundle_point(rng, n, k)
    assert phi_inv(phi(P)) == P


def test_from_matrix_detects_rank_and_rejects_wrong_k():
    Sigma = np.diag([3.0, 1.0, 0.0, 0.0])
    assert PsdFixedRank.from_matrix(Sigma).k == 2
    with pytest.raises(RankError) as info:
        PsdFixedRank.from_matrix(Sigma, k=3)
    assert info.value.rank == 2
    with pytest.raises(RankError):
        PsdFixedRank.from_matrix(np.zeros((3, 3)))


def test_from_matrix_rejects_indefinite():
    with pytest.raises(NotPositiveSemidefiniteError):
        PsdFixedRank.from_matrix(np.diag([1.0, -1.0]))


@given(seed=seeds, shape=shapes)
@settings(max_examples=30, deadline=None)
def test_dphi_inverse_recovers_bundle_tangent(seed, shape):
    n, k = shape
    rng = np.random.default_rng(seed)
    P = random_bundle_point(rng, n, k)
    W = random_bundle_tangent(rng, n, k)
    back = dphi_inv(P, dphi(P, W))
    assert_allclose(back.B, W.B, atol=1e-10)
    assert_allclose(back.T.entries, W.T.entries, atol=1e-10)


def test_dphi_inverse_rejects_non_tangent(rng):
    P = random_bundle_point(rng, 4, 2)
    with pytest.raises(TangencyError):
        dphi_inv(P, P.Qperp @ P.Qperp.T)


@given(seed=seeds, shape=shapes)
@settings(max_examples=50, deadline=None)
def test_bundle_metric_is_pullback_of_ambient_metric(seed, shape):
    n, k = shape
    rng = np.random.default_rng(seed)
    P = random_bundle_point(rng, n, k)
    W1, W2 = random_bundle_tangent(rng, n, k), random_bundle_tangent(rng, n, k)
    h = bundle_metric(P, W1, W2)
    g = ambient_metric(phi(P), dphi(P, W1), dphi(P, W2))
    assert abs(h - g) <= 1e-9 * (1.0 + abs(h))


@given(seed=seeds, shape=shapes)
@settings(max_examples=20, deadline=None)
def test_bundle_metric_is_gauge_invariant(seed, shape):
    n, k = shape
    rng = np.random.default_rng(seed)
    P = random_bundle_point(rng, n, k)
    W1, W2 = random_bundle_tangent(rng, n, k), random_bundle_tangent(rng, n, k)
    G = random_orthogonal_matrix(rng, k)
    P_g, W1_g = group_act(G, P, W1)
    _, W2_g = group_act(G, P, W2)
    h = bundle_metric(P, W1, W2)
    assert abs(bundle_metric(P_g, W1_g, W2_g) - h) <= 1e-9 * (1.0 + abs(h))
    g = ambient_metric(phi(P_g), dphi(P_g, W1_g), dphi(P_g, W2_g))
    assert abs(g - h) <= 1e-9 * (1.0 + abs(h))


@given(d=st.floats(0.1, 10.0), b=st.floats(-3.0, 3.0), u=st.floats(-3.0, 3.0))
@settings(max_examples=50, deadline=None)
def test_rank_one_planar_metric(d, b, u):
    P = BundlePoint.from_arrays([[1.0], [0.0]], [[d]])
    W = BundleTangent([[b]], [[u]])
    assert bundle_metric(P, W, W) == pytest.approx(d * b * b + u * u / (4.0 * d), abs=1e-12)


def test_metric_split_parts(rng):
    P = random_bundle_point(rng, 5, 2)
    W = random_bundle_tangent(rng, 5, 2)
    h_hor, h_ver = metric_split(P, W, W)
    assert h_hor == pytest.approx(np.trace(W.B @ P.D.entries @ W.B.T))
    assert h_ver >= 0.0
    assert h_hor + h_ver == pytest.approx(bundle_metric(P, W, W))


def test_gauge_directions_are_in_the_kernel(rng):
    P = random_bundle_point(rng, 6, 3)
    M = rng.standard_normal((3, 3))
    V, T = gauge_direction(P, M - M.T)
    assert_allclose(dphi_total(P, V, T).V, np.zeros((6, 6)), atol=1e-12)


def test_ambient_tangent_symmetrizes():
    assert_allclose(AmbientTangent([[0.0, 2.0], [0.0, 0.0]]).V, [[0.0, 1.0], [1.0, 0.0]])


@given(seed=seeds, shape=shapes, scale=st.sampled_from([1.0, 10.0, 100.0]))
@settings(max_examples=60, deadline=None)
def test_distance_of_identical_inputs_is_zero(seed, shape, scale):
    X = scale * random_full_rank(np.random.default_rng(seed), *shape)
    A = X @ X.T
    A = 0.5 * (A + A.T)
    assert bw_distance(A, A) <= 1e-12 * (1.0 + np.trace(A))
    assert bw_distance_procrustes(X, X) <= 1e-12 * (1.0 + np.trace(A))


@given(seed=seeds, shape=shapes, scale=st.sampled_from([1.0, 10.0, 100.0]))
@settings(max_examples=40, deadline=None)
def test_distance_of_one_ulp_perturbation_is_tiny(seed, shape, scale):
    X = scale * random_full_rank(np.random.default_rng(seed), *shape)
    A = X @ X.T
    A = 0.5 * (A + A.T)
    B = np.nextafter(A, np.inf)
    assert bw_distance(A, B) <= 1e-8 * (1.0 + np.sqrt(np.trace(A)))


@pytest.mark.parametrize("scale", [1.0, 10.0, 100.0])
@pytest.mark.parametrize("c", [0.25, 1.0 + 1e-6, 4.0])
def test_distance_to_a_multiple(rng, scale, c):
    X = scale * random_full_rank(rng, 6, 2)
    A = X @ X.T
    A = 0.5 * (A + A.T)
    expected = abs(1.0 - np.sqrt(c)) * np.sqrt(np.trace(A))
    assert bw_distance(A, c * A) == pytest.approx(expected, rel=1e-6, abs=1e-12 * (1.0 + np.trace(A)))


def test_distance_of_diagonal_pair():
    a = np.array([4.0, 1.0, 2.25, 0.0])
    b = np.array([1.0, 0.0, 0.25, 0.0])
    expected = np.sqrt(np.sum((np.sqrt(a) - np.sqrt(b)) ** 2))
    assert bw_distance(np.diag(a), np.diag(b)) == pytest.approx(expected, abs=1e-12)


@given(seed=seeds, n=st.integers(2, 8), data=st.data())
@settings(max_examples=40, deadline=None)
def test_distance_agrees_with_procrustes(seed, n, data):
    k = data.draw(st.integers(1, min(n, 4)))
    rng = np.random.default_rng(seed)
    X, Y = random_full_rank(rng, n, k), random_full_rank(rng, n, k)
    assert abs(bw_distance(X @ X.T, Y @ Y.T) - bw_distance_procrustes(X, Y)) <= 1e-8


def test_distance_rejects_indefinite_and_asymmetric():
    with pytest.raises(NotPositiveSemidefiniteError):
        bw_distance(np.diag([1.0, -1.0]), np.eye(2))
    with pytest.raises(NotPositiveSemidefiniteError):
        bw_distance(np.array([[1.0, 0.5], [0.0, 1.0]]), np.eye(2))


def test_procrustes_requires_full_rank_unless_waived():
    X = np.array([[1.0, 0.0], [0.0, 0.0], [0.0, 0.0]])
    Y = np.eye(3)[:, :2]
    with pytest.raises(RankError):
        bw_distance_procrustes(X, Y)
    assert bw_distance_procrustes(X, Y, require_full_rank=False) == pytest.approx(1.0)


def test_psd_factor_reproduces_matrix(rng):
    X = random_full_rank(rng, 5, 2)
    Sigma = X @ X.T
    F = psd_factor(Sigma)
    assert F.shape == (5, 5)
    assert_allclose(F @ F.T, Sigma, atol=1e-12)
