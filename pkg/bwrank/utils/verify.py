"""
Invariant verification suite.
Runs every module's property on randomized inputs, trials in parallel.
"""

import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from bwrank.config import Settings
from bwrank.utils import samplers
from bwrank.utils.bwgeom import (
    ambient_metric,
    bundle_metric,
    bw_distance,
    bw_distance_procrustes,
    dphi,
    dphi_total,
    phi,
    phi_inv,
)
from bwrank.utils.checks import CheckResult, check
from bwrank.utils.closed_forms import vertical_geodesic
from bwrank.utils.geodesics import (
    GeodesicState,
    conservation_report,
    group_act_state,
    integrate,
    pullback_curve,
)
from bwrank.utils.logmaps import (
    build_log_rotation,
    certificate_residual,
    decompose_log_rotation,
    log_index_params,
)
from bwrank.utils.manifolds import (
    BundlePoint,
    BundleTangent,
    StiefelPoint,
    gauge_direction,
    grassmann_dpi,
    group_act,
    orthogonal_angle_count,
    principal_cosines,
    stiefel_split,
)
from bwrank.utils.matkernels import (
    SymMatrix,
    psd_sqrt,
    random_orthogonal,
    sylvester_solve,
    sym_eig,
)
from bwrank.utils.oracles import horizontal_lift, lift_base, quotient_line_oracle

logger = logging.getLogger(__name__)

PropertyFn = Callable[[np.random.Generator, "VerifyOptions"], CheckResult]

SHAPES = ((4, 2), (5, 3), (6, 2))


@dataclass
class VerifyOptions:
    dt: float
    settings: Settings


@dataclass
class Property:
    name: str
    module: str
    fn: PropertyFn


@dataclass
class PropertyReport:
    name: str
    module: str
    trials: int
    failures: int
    worst_error: float
    tolerance: float
    message: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.failures == 0


def _shape(rng: np.random.Generator):
    return SHAPES[int(rng.integers(len(SHAPES)))]


def _skew(rng: np.random.Generator, k: int) -> np.ndarray:
    M = rng.standard_normal((k, k))
    return (M - M.T) / 2.0


def _relative(value: float, scale: float) -> float:
    return value / max(1.0, scale)


# matkernels

def prop_sylvester_residual(rng, opts) -> CheckResult:
    k = int(rng.integers(1, 6))
    D, T = samplers.random_spd(rng, k), samplers.random_sym(rng, k)
    S = sylvester_solve(D, T).entries
    err = np.linalg.norm(D.entries @ S + S @ D.entries - T.entries)
    return check("sylvester_residual", _relative(err, np.linalg.norm(T.entries)), 1e-10)


def prop_sylvester_equivariance(rng, opts) -> CheckResult:
    k = int(rng.integers(1, 6))
    D, T = samplers.random_spd(rng, k), samplers.random_sym(rng, k)
    G = samplers.random_orthogonal_matrix(rng, k)
    lhs = sylvester_solve(G.T @ D.entries @ G, G.T @ T.entries @ G).entries
    rhs = G.T @ sylvester_solve(D, T).entries @ G
    return check("sylvester_equivariance", np.linalg.norm(lhs - rhs), 1e-9)


def prop_sylvester_self_adjoint(rng, opts) -> CheckResult:
    k = int(rng.integers(1, 6))
    D = samplers.random_spd(rng, k)
    T1, T2 = samplers.random_sym(rng, k).entries, samplers.random_sym(rng, k).entries
    lhs = np.trace(sylvester_solve(D, T1).entries @ T2)
    rhs = np.trace(T1 @ sylvester_solve(D, T2).entries)
    return check("sylvester_self_adjoint", abs(lhs - rhs), 1e-9)


def prop_eig_reconstruction(rng, opts) -> CheckResult:
    A = samplers.random_sym(rng, int(rng.integers(1, 7))).entries
    pair = sym_eig(A)
    recon = (pair.vectors * pair.values) @ pair.vectors.T
    err = _relative(np.linalg.norm(A - recon), np.linalg.norm(A))
    return check("eig_reconstruction", err, 1e-10)


def prop_psd_sqrt_square(rng, opts) -> CheckResult:
    R0 = samplers.random_spd(rng, int(rng.integers(1, 6))).entries
    err = np.linalg.norm(psd_sqrt(R0 @ R0).entries - R0)
    return check("psd_sqrt_of_square", err, 1e-8)


# manifolds

def prop_stiefel_roundtrip(rng, opts) -> CheckResult:
    n, k = _shape(rng)
    frame = samplers.random_frame(rng, n, k)
    A, B = _skew(rng, k), rng.standard_normal((n - k, k))
    V = frame.Q.Q @ A + frame.Qperp @ B
    split = stiefel_split(frame, V)
    err = max(np.linalg.norm(split.A - A), np.linalg.norm(split.B - B),
              np.linalg.norm(split.to_ambient(frame) - V))
    return check("stiefel_split_roundtrip", err, 1e-9)


def prop_grassmann_kernel(rng, opts) -> CheckResult:
    n, k = _shape(rng)
    frame = samplers.random_frame(rng, n, k)
    err = np.linalg.norm(grassmann_dpi(frame, frame.Q.Q @ _skew(rng, k)))
    return check("grassmann_dpi_kernel", err, 1e-10)


def prop_principal_angles(rng, opts) -> CheckResult:
    n, k = _shape(rng)
    Q1 = samplers.random_frame(rng, n, k).Q
    Q2 = samplers.random_frame(rng, n, k).Q
    G = samplers.random_orthogonal_matrix(rng, k)
    base = principal_cosines(Q1, Q2)
    err = max(np.max(np.abs(base - principal_cosines(Q2, Q1))),
              np.max(np.abs(base - principal_cosines(StiefelPoint(Q1.Q @ G), Q2))))
    return check("principal_angles_symmetric_invariant", err, 1e-9)


def prop_class_invariance(rng, opts) -> CheckResult:
    n, k = _shape(rng)
    P = samplers.random_bundle_point(rng, n, k)
    moved, _ = group_act(samplers.random_orthogonal_matrix(rng, k), P)
    err = _relative(np.linalg.norm(phi(moved).Sigma - phi(P).Sigma), np.linalg.norm(P.image()))
    return check("class_invariance", err, 1e-9)


# bwgeom

def prop_pullback_identity(rng, opts) -> CheckResult:
    n, k = _shape(rng)
    P = samplers.random_bundle_point(rng, n, k)
    W1, W2 = samplers.random_bundle_tangent(rng, n, k), samplers.random_bundle_tangent(rng, n, k)
    h = bundle_metric(P, W1, W2)
    g = ambient_metric(phi(P), dphi(P, W1), dphi(P, W2))
    return check("pullback_metric_identity", abs(h - g) / (1.0 + abs(h)), 1e-9)


def prop_gauge_kernel(rng, opts) -> CheckResult:
    n, k = _shape(rng)
    P = samplers.random_bundle_point(rng, n, k)
    V, T = gauge_direction(P, _skew(rng, k))
    return check("dphi_gauge_kernel", np.linalg.norm(dphi_total(P, V, T).V), 1e-10)


def prop_metric_invariance(rng, opts) -> CheckResult:
    n, k = _shape(rng)
    P = samplers.random_bundle_point(rng, n, k)
    W1, W2 = samplers.random_bundle_tangent(rng, n, k), samplers.random_bundle_tangent(rng, n, k)
    G = samplers.random_orthogonal_matrix(rng, k)
    P_g, W1_g = group_act(G, P, W1)
    _, W2_g = group_act(G, P, W2)
    h, h_g = bundle_metric(P, W1, W2), bundle_metric(P_g, W1_g, W2_g)
    return check("metric_invariance", abs(h - h_g) / (1.0 + abs(h)), 1e-9)


def prop_phi_roundtrip(rng, opts) -> CheckResult:
    n, k = _shape(rng)
    X = samplers.random_full_rank(rng, n, k)
    Sigma = X @ X.T
    P = phi_inv(Sigma, k=k)
    err = _relative(np.linalg.norm(phi(P).Sigma - Sigma), np.linalg.norm(Sigma))
    P2 = samplers.random_bundle_point(rng, n, k)
    back = phi_inv(phi(P2))
    err = max(err, _relative(np.linalg.norm(back.image() - P2.image()), np.linalg.norm(P2.image())))
    return check("phi_roundtrip", err, 1e-9)


def prop_distance_oracle(rng, opts) -> CheckResult:
    n = int(rng.integers(2, 9))
    k = int(rng.integers(1, min(n, 4) + 1))
    X, Y = samplers.random_full_rank(rng, n, k), samplers.random_full_rank(rng, n, k)
    err = abs(bw_distance(X @ X.T, Y @ Y.T) - bw_distance_procrustes(X, Y))
    return check("distance_cross_oracle", err, 1e-8)


# geodesics

def _trajectory(rng, opts, vertical: bool = False):
    n, k = _shape(rng)
    s0 = samplers.random_geodesic_state(rng, n, k, vertical=vertical)
    return s0, integrate(s0, 1.0, dt=opts.dt)


def prop_conservation(rng, opts) -> CheckResult:
    _, traj = _trajectory(rng, opts)
    report = conservation_report(traj)
    err = max(report["energy_drift"], report["momentum_residual"])
    return check("energy_and_momentum_conservation", err, 1e-7)


def prop_frame_integrity(rng, opts) -> CheckResult:
    _, traj = _trajectory(rng, opts)
    return check("frame_integrity", conservation_report(traj)["orthogonality_residual"], 1e-8)


def prop_totally_geodesic(rng, opts) -> CheckResult:
    s0, traj = _trajectory(rng, opts, vertical=True)
    q_err = max(np.linalg.norm(s.Q - s0.Q) for s in traj.states)
    d_err = max(np.linalg.norm(s.D - vertical_geodesic(s0.D, s0.S, float(t)).entries)
                for t, s in zip(traj.times, traj.states))
    return check("totally_geodesic_fibers", max(q_err / 1e-9, d_err / 1e-7), 1.0,
                 q_error=q_err, d_error=d_err)


def prop_gauge_covariance(rng, opts) -> CheckResult:
    s0, traj = _trajectory(rng, opts)
    G = samplers.random_orthogonal_matrix(rng, s0.k)
    moved = integrate(group_act_state(G, s0), 1.0, dt=opts.dt)
    err = 0.0
    for a, b in zip(traj.states, moved.states):
        expected = group_act_state(G, a)
        err = max(err, *(np.linalg.norm(getattr(expected, name) - getattr(b, name))
                         for name in ("Q", "Qperp", "D", "B", "S")))
    return check("gauge_covariance", err, 1e-7)


def prop_oracle_equivalence(rng, opts) -> CheckResult:
    s0, traj = _trajectory(rng, opts)
    P0 = BundlePoint.from_arrays(s0.Q, s0.D, s0.Qperp)
    W0 = BundleTangent(s0.B, SymMatrix(s0.T))
    X0, H = lift_base(P0), horizontal_lift(P0, dphi(P0, W0))
    curve = pullback_curve(traj)
    stride = max(1, len(curve) // 50)
    err = max(np.linalg.norm(curve[i].Sigma - quotient_line_oracle(X0, H, float(traj.times[i])).Sigma)
              for i in range(0, len(curve), stride))
    return check("oracle_equivalence", err / (1.0 + np.linalg.norm(curve[0].Sigma)), 1e-6)


def prop_energy_stationarity(rng, opts) -> CheckResult:
    _, traj = _trajectory(rng, opts)
    energies = traj.monitor_values("energy")
    rate = abs(energies[1] - energies[0]) / (traj.times[1] - traj.times[0])
    return check("energy_rate_at_start", rate, 1e-6)


# logmaps

def _log_pair(rng, k: int, r: int):
    """X, Y in ℝ^{2k} whose spans share k − r directions and are orthogonal in r."""
    n = 2 * k
    F = samplers.random_orthogonal_matrix(rng, n)
    shared, own_x, own_y = F[:, :k - r], F[:, k - r:k], F[:, k:k + r]
    X = np.hstack([shared, own_x]) @ samplers.random_full_rank(rng, k, k)
    Y = np.hstack([shared, own_y]) @ samplers.random_full_rank(rng, k, k)
    return X, Y


def prop_log_certificate(rng, opts) -> CheckResult:
    k = int(rng.integers(1, 4))
    r = int(rng.integers(0, k + 1))
    X, Y = _log_pair(rng, k, r)
    p = log_index_params(X, Y, opts.settings.rank_tol, opts.settings.angle_tol)
    Qx, _ = np.linalg.qr(X)
    Qy, _ = np.linalg.qr(Y)
    count = orthogonal_angle_count(Qx, Qy, opts.settings.angle_tol)
    if p.r != r or count != r:
        return check("log_certificate", np.inf, 1e-8, expected_r=r, svd_r=p.r, angle_r=count)
    R = build_log_rotation(p, random_orthogonal(r, int(rng.integers(1 << 30)), 1))
    return check("log_certificate", certificate_residual(p, R) / (1.0 + p.sigma_max), 1e-8)


def prop_log_bijection(rng, opts) -> CheckResult:
    k = int(rng.integers(2, 4))
    X, Y = _log_pair(rng, k, 2)
    p = log_index_params(X, Y)
    Rr = random_orthogonal(2, int(rng.integers(1 << 30)), int(rng.choice([-1, 1])))
    err = np.linalg.norm(decompose_log_rotation(p, build_log_rotation(p, Rr)) - Rr)
    return check("log_bijection_roundtrip", err, 1e-9)


PROPERTIES: List[Property] = [
    Property("sylvester_residual", "matkernels", prop_sylvester_residual),
    Property("sylvester_equivariance", "matkernels", prop_sylvester_equivariance),
    Property("sylvester_self_adjoint", "matkernels", prop_sylvester_self_adjoint),
    Property("eig_reconstruction", "matkernels", prop_eig_reconstruction),
    Property("psd_sqrt_of_square", "matkernels", prop_psd_sqrt_square),
    Property("stiefel_split_roundtrip", "manifolds", prop_stiefel_roundtrip),
    Property("grassmann_dpi_kernel", "manifolds", prop_grassmann_kernel),
    Property("principal_angles_symmetric_invariant", "manifolds", prop_principal_angles),
    Property("class_invariance", "manifolds", prop_class_invariance),
    Property("pullback_metric_identity", "bwgeom", prop_pullback_identity),
    Property("dphi_gauge_kernel", "bwgeom", prop_gauge_kernel),
    Property("metric_invariance", "bwgeom", prop_metric_invariance),
    Property("phi_roundtrip", "bwgeom", prop_phi_roundtrip),
    Property("distance_cross_oracle", "bwgeom", prop_distance_oracle),
    Property("energy_and_momentum_conservation", "geodesics", prop_conservation),
    Property("frame_integrity", "geodesics", prop_frame_integrity),
    Property("totally_geodesic_fibers", "geodesics", prop_totally_geodesic),
    Property("gauge_covariance", "geodesics", prop_gauge_covariance),
    Property("oracle_equivalence", "geodesics", prop_oracle_equivalence),
    Property("energy_rate_at_start", "geodesics", prop_energy_stationarity),
    Property("log_certificate", "logmaps", prop_log_certificate),
    Property("log_bijection_roundtrip", "logmaps", prop_log_bijection),
]


def _run_one(prop: Property, seed: int, trial: int, index: int, opts: VerifyOptions) -> CheckResult:
    rng = np.random.default_rng([seed, trial, index])
    try:
        return prop.fn(rng, opts)
    except Exception as e:  # a crash counts as a failure of the property
        logger.error("property %s trial %d raised %s: %s", prop.name, trial, type(e).__name__, e)
        return check(prop.name, np.inf, 0.0, exception=f"{type(e).__name__}: {e}")


def run_verify(seed: int = 0, trials: int = 3, dt: Optional[float] = None,
               settings: Optional[Settings] = None, max_workers: int = 4,
               properties: Optional[Sequence[Property]] = None) -> List[PropertyReport]:
    """Run every property `trials` times; one report per property."""
    settings = settings or Settings()
    opts = VerifyOptions(dt=dt if dt is not None else settings.dt, settings=settings)
    props = list(properties or PROPERTIES)
    results: Dict[str, List[CheckResult]] = {p.name: [] for p in props}

    if trials > 0:
        with ThreadPoolExecutor(max_workers=max_workers) as executor:
            future_to_prop = {
                executor.submit(_run_one, prop, seed, trial, index, opts): prop
                for index, prop in enumerate(props)
                for trial in range(trials)
            }
            for future in as_completed(future_to_prop):
                prop = future_to_prop[future]
                results[prop.name].append(future.result())

    reports = []
    for prop in props:
        checks = results[prop.name]
        failures = [c for c in checks if not c.passed]
        worst = max((c.error for c in checks), default=0.0)
        tolerance = checks[0].tolerance if checks else 0.0
        message = None
        if failures:
            message = failures[0].details.get("exception") or \
                f"error {failures[0].error:.3e} > tolerance {failures[0].tolerance:.1e}"
        reports.append(PropertyReport(prop.name, prop.module, len(checks), len(failures),
                                      worst, tolerance, message))
    return reports
