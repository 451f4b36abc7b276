import numpy as np
import pytest
from numpy.testing import assert_allclose

from bwrank.utils.closed_forms import (
    example1_theta,
    example3_diagonal,
    example3_frame,
    example3_r,
    k1_geodesic,
    k1_state,
    planar_state,
    vertical_domain,
    vertical_geodesic,
)
from bwrank.utils.errors import DimensionMismatchError, DomainExceededError
from bwrank.utils.geodesics import integrate


def test_vertical_domain_bounds():
    lower, upper = vertical_domain(np.diag([-2.0, 0.5]))
    assert lower == pytest.approx(-2.0)
    assert upper == pytest.approx(0.5)
    assert vertical_domain(np.zeros((2, 2))) == (-np.inf, np.inf)


def test_vertical_geodesic_formula_and_domain():
    D0 = np.array([[2.0, 0.3], [0.3, 1.0]])
    S0 = np.array([[0.2, -0.1], [-0.1, 0.3]])
    M = np.eye(2) + 0.7 * S0
    assert_allclose(vertical_geodesic(D0, S0, 0.7).entries, M @ D0 @ M)
    with pytest.raises(DomainExceededError) as info:
        vertical_geodesic(np.eye(1), [[-2.0]], 0.6)
    assert info.value.t_max == pytest.approx(0.5)


def test_k1_state_starts_at_initial_data():
    q0 = np.array([1.0, 2.0, 2.0, 0.0]) / 3.0
    b0 = np.array([0.3, -0.4, 0.2])
    s = k1_state(q0, 2.0, b0, 0.1, 0.0)
    assert_allclose(s.Q[:, 0], q0, atol=1e-15)
    assert_allclose(s.D, [[2.0]])
    assert_allclose(s.B[:, 0], b0, atol=1e-15)
    assert_allclose(s.S, [[0.1]], atol=1e-15)


def test_k1_frame_stays_orthonormal():
    q0 = np.array([1.0, 2.0, 2.0, 0.0]) / 3.0
    s = k1_state(q0, 2.0, [0.3, -0.4, 0.2], 0.1, 2.5)
    assert_allclose(s.frame_matrix.T @ s.frame_matrix, np.eye(4), atol=1e-14)


def test_k1_geodesic_rejects_bad_input():
    with pytest.raises(DimensionMismatchError):
        k1_geodesic([1.0, 1.0], 1.0, [0.5], 0.0, 0.1)
    with pytest.raises(ValueError):
        k1_geodesic([1.0, 0.0], 1.0, [0.0], 0.0, 0.1)
    with pytest.raises(ValueError):
        k1_geodesic([1.0, 0.0], -1.0, [0.5], 0.0, 0.1)


def test_k1_matches_integrator_in_r4():
    q0 = np.array([1.0, 2.0, 2.0, 0.0]) / 3.0
    b0 = np.array([0.3, -0.4, 0.2])
    state = k1_state(q0, 2.0, b0, 0.1, 0.0)
    traj = integrate(state, 1.0)
    for t, s in zip(traj.times[::100], traj.states[::100]):
        expected = k1_state(q0, 2.0, b0, 0.1, float(t), state.Qperp)
        for name in ("Q", "Qperp", "D", "B", "S"):
            assert_allclose(getattr(s, name), getattr(expected, name), atol=1e-6)


def test_planar_angle_form_matches_integrator():
    rng = np.random.default_rng(11)
    for _ in range(10):
        theta0, d0 = rng.uniform(-np.pi, np.pi), rng.uniform(0.5, 2.0)
        b0 = rng.choice([-1.0, 1.0]) * rng.uniform(0.1, 0.8)
        s0 = rng.uniform(-0.3, 0.3)
        traj = integrate(planar_state(theta0, d0, b0, s0), 1.0)
        q = traj.block("Q")[:, :, 0]
        theta = theta0 + np.unwrap(np.arctan2(q[:, 1], q[:, 0]) - theta0)
        expected = np.array([example1_theta(theta0, d0, b0, s0, float(t)) for t in traj.times])
        assert_allclose(theta, expected[:, 0], atol=1e-6)
        assert_allclose(traj.block("D")[:, 0, 0], expected[:, 1], atol=1e-6)


def test_planar_vertical_motion():
    d0, s0 = 1.3, -0.4
    traj = integrate(planar_state(0.2, d0, 0.0, s0), 1.0)
    assert_allclose(traj.block("D")[:, 0, 0], d0 * (1.0 + s0 * traj.times) ** 2, atol=1e-9)


def test_example3_spot_values():
    s = example3_diagonal(1.0)
    assert example3_r(1.0) == pytest.approx(9.0 / 8.0)
    assert s.D[0, 0] == pytest.approx(1.8125)
    assert s.S[0, 0] == pytest.approx(9.0 / 29.0)
    assert s.D[2, 2] == pytest.approx(1.5625)
    assert s.S[2, 2] == pytest.approx(0.2)
    assert (s.B @ s.D)[0, 0] == pytest.approx(0.5)


def test_example3_initial_data():
    s = example3_diagonal(0.0)
    assert_allclose(s.frame_matrix, np.eye(5), atol=1e-15)
    assert_allclose(s.D, np.eye(3))
    assert_allclose(s.S, 0.25 * np.eye(3))
    assert_allclose(s.B, [[0.5, 0.0, 0.0], [0.0, 0.5, 0.0]])


def test_example3_frame_rotates_two_planes():
    F = example3_frame(0.3)
    c, s = np.cos(0.3), np.sin(0.3)
    assert F[0, 0] == F[3, 3] == F[1, 1] == F[4, 4] == pytest.approx(c)
    assert F[3, 0] == F[4, 1] == pytest.approx(s)
    assert F[0, 3] == F[1, 4] == pytest.approx(-s)
    assert F[2, 2] == 1.0
