"""
Built-in reproductions of the worked examples.

Each reproduction is a run config plus a list of checks evaluated on the
integrated trajectory:

- ex1-n2k1  planar rank-one geodesic against the angle closed form, plus the
            pullback Σ(t) being a quadratic polynomial in t
- ex2-nk1   rank-one geodesic in ℝ⁴ against the full closed-form state
- ex3-a     n = 5, k = 3 diagonal data against the decoupled closed forms
- ex3-b     n = 5, k = 3 coupled data; conservation monitors and the
            quotient straight-line oracle only
"""

from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List

import numpy as np

from bwrank.utils.bwgeom import dphi, phi
from bwrank.utils.checks import CheckResult, check, sup_error
from bwrank.utils.closed_forms import example1_theta, example3_diagonal, k1_state
from bwrank.utils.geodesics import Trajectory, conservation_report, pullback_curve
from bwrank.utils.manifolds import BundlePoint, BundleTangent
from bwrank.utils.matkernels import SymMatrix
from bwrank.utils.oracles import horizontal_lift, lift_base, quotient_line_oracle
from bwrank.utils.run_config import RunConfig

CLOSED_FORM_TOL = 1e-6
CONSERVATION_TOL = 1e-7
FRAME_TOL = 1e-8
INITIAL_DATA_TOL = 1e-8

CheckFn = Callable[[RunConfig, Trajectory], List[CheckResult]]


@dataclass
class Reproduction:
    id: str
    description: str
    config: Dict[str, Any]
    checks: List[CheckFn] = field(default_factory=list)

    def run_checks(self, cfg: RunConfig, traj: Trajectory) -> List[CheckResult]:
        results: List[CheckResult] = []
        for fn in self.checks:
            results.extend(fn(cfg, traj))
        return results


def sample_indices(traj: Trajectory, count: int = 101) -> np.ndarray:
    last = len(traj.states) - 1
    return np.unique(np.round(np.linspace(0, last, min(count, last + 1))).astype(int))


def initial_bundle_data(cfg: RunConfig):
    """(P₀, W₀) with W₀ = (B₀, T₀), T₀ = D₀S₀ + S₀D₀."""
    P0 = BundlePoint(cfg.frame, cfg.D0)
    D, S = cfg.D0.entries, cfg.S0.entries
    return P0, BundleTangent(cfg.B0, SymMatrix(D @ S + S @ D))


def monitor_checks(commuting: bool) -> CheckFn:
    def _checks(cfg: RunConfig, traj: Trajectory) -> List[CheckResult]:
        report = conservation_report(traj)
        results = [
            check("energy_conservation", report["energy_drift"], CONSERVATION_TOL),
            check("angular_momentum_conservation", report["momentum_residual"], CONSERVATION_TOL),
            check("frame_orthogonality", report["orthogonality_residual"], FRAME_TOL),
        ]
        if commuting:
            results.append(check("bd_conservation", report["bd_residual"], CONSERVATION_TOL))
        return results
    return _checks


def quotient_oracle_check(cfg: RunConfig, traj: Trajectory) -> List[CheckResult]:
    P0, W0 = initial_bundle_data(cfg)
    X0 = lift_base(P0)
    H = horizontal_lift(P0, dphi(P0, W0))
    curve = pullback_curve(traj)
    scale = 1.0 + float(np.linalg.norm(curve[0].Sigma))
    worst = 0.0
    for i in sample_indices(traj):
        oracle = quotient_line_oracle(X0, H, float(traj.times[i]), rank_tol=cfg.rank_tol)
        worst = max(worst, float(np.linalg.norm(curve[i].Sigma - oracle.Sigma)))
    return [check("quotient_oracle", worst, CLOSED_FORM_TOL * scale)]


def _planar_angle_checks(cfg: RunConfig, traj: Trajectory) -> List[CheckResult]:
    q = traj.block("Q")[:, :, 0]
    theta_num = np.unwrap(np.arctan2(q[:, 1], q[:, 0]))
    theta0 = float(theta_num[0])
    d0, b0, s0 = float(cfg.D0.entries[0, 0]), float(cfg.B0[0, 0]), float(cfg.S0.entries[0, 0])
    expected = np.array([example1_theta(theta0, d0, b0, s0, float(t)) for t in traj.times])
    d_num = traj.block("D")[:, 0, 0]
    return [
        check("theta_closed_form", sup_error(theta_num, expected[:, 0]), CLOSED_FORM_TOL),
        check("d_closed_form", sup_error(d_num, expected[:, 1]), CLOSED_FORM_TOL),
    ]


def _pullback_polynomial_checks(cfg: RunConfig, traj: Trajectory) -> List[CheckResult]:
    curve = pullback_curve(traj)
    idx = sample_indices(traj)
    sigmas = np.stack([curve[i].Sigma for i in idx])
    second = sigmas[2:] - 2.0 * sigmas[1:-1] + sigmas[:-2]
    spread = float(np.max(np.abs(second - second.mean(axis=0)))) if len(second) else 0.0

    P0, W0 = initial_bundle_data(cfg)
    h = float(traj.times[1] - traj.times[0])
    velocity = (-3.0 * curve[0].Sigma + 4.0 * curve[1].Sigma - curve[2].Sigma) / (2.0 * h)
    return [
        check("pullback_second_differences", spread, CLOSED_FORM_TOL),
        check("pullback_initial_point", sup_error(curve[0].Sigma, phi(P0).Sigma), INITIAL_DATA_TOL),
        check("pullback_initial_velocity", sup_error(velocity, dphi(P0, W0).V), INITIAL_DATA_TOL),
    ]


def _rank_one_state_checks(cfg: RunConfig, traj: Trajectory) -> List[CheckResult]:
    q0 = cfg.frame.Q.Q[:, 0]
    Qperp0 = cfg.frame.Qperp
    d0, s0 = float(cfg.D0.entries[0, 0]), float(cfg.S0.entries[0, 0])
    b0 = cfg.B0[:, 0]
    worst = {"Q": 0.0, "Qperp": 0.0, "D": 0.0, "B": 0.0, "S": 0.0}
    for i in sample_indices(traj):
        expected = k1_state(q0, d0, b0, s0, float(traj.times[i]), Qperp0)
        actual = traj.states[i]
        for block in worst:
            worst[block] = max(worst[block], sup_error(getattr(actual, block), getattr(expected, block)))
    return [check(f"k1_{block}_closed_form", err, CLOSED_FORM_TOL) for block, err in worst.items()]


def _example3_checks(cfg: RunConfig, traj: Trajectory) -> List[CheckResult]:
    worst = {"Q": 0.0, "Qperp": 0.0, "D": 0.0, "B": 0.0, "S": 0.0}
    for t, actual in zip(traj.times, traj.states):
        expected = example3_diagonal(float(t))
        for block in worst:
            worst[block] = max(worst[block], sup_error(getattr(actual, block), getattr(expected, block)))
    results = [check(f"example3_{block}_closed_form", err, CLOSED_FORM_TOL) for block, err in worst.items()]

    bd = np.zeros((2, 3))
    bd[0, 0] = bd[1, 1] = 0.5
    bd_err = max(sup_error(s.B @ s.D, bd) for s in traj.states)
    results.append(check("example3_bd_constant", bd_err, CONSERVATION_TOL))

    if abs(traj.times[-1] - 1.0) < 1e-12:
        final = traj.final
        spots = {
            "d1(1)": (final.D[0, 0], 1.8125),
            "s1(1)": (final.S[0, 0], 9.0 / 29.0),
            "d3(1)": (final.D[2, 2], 1.5625),
            "s3(1)": (final.S[2, 2], 0.2),
        }
        for name, (value, expected) in spots.items():
            results.append(check(f"example3_spot_{name}", abs(value - expected), CLOSED_FORM_TOL))
    return results


_THETA0 = 0.3

REPRODUCTIONS: Dict[str, Reproduction] = {
    "ex1-n2k1": Reproduction(
        id="ex1-n2k1",
        description="n=2, k=1: θ(t) and d(t) closed forms; Σ(t) quadratic in t",
        config={
            "label": "ex1-n2k1", "n": 2, "k": 1,
            "Q0": [[np.cos(_THETA0)], [np.sin(_THETA0)]],
            "Qperp0": [[-np.sin(_THETA0)], [np.cos(_THETA0)]],
            "D0": [[1.5]], "B0": [[0.8]], "S0": [[-0.2]],
            "t_max": 1.0,
            "outputs": [{"kind": "csv", "path": "ex1-n2k1.csv"}, {"kind": "svg", "path": "ex1-n2k1.svg"}],
        },
        checks=[_planar_angle_checks, _pullback_polynomial_checks, monitor_checks(commuting=True)],
    ),
    "ex2-nk1": Reproduction(
        id="ex2-nk1",
        description="n=4, k=1: full rank-one closed-form state",
        config={
            "label": "ex2-nk1", "n": 4, "k": 1,
            "Q0": [[1.0 / 3.0], [2.0 / 3.0], [2.0 / 3.0], [0.0]],
            "D0": [[2.0]], "B0": [[0.3], [-0.4], [0.2]], "S0": [[0.1]],
            "t_max": 1.0,
            "outputs": [{"kind": "csv", "path": "ex2-nk1.csv"}, {"kind": "svg", "path": "ex2-nk1.svg"}],
        },
        checks=[_rank_one_state_checks, monitor_checks(commuting=True), quotient_oracle_check],
    ),
    "ex3-a": Reproduction(
        id="ex3-a",
        description="n=5, k=3 diagonal data: decoupled closed forms and rotating frame",
        config={
            "label": "ex3-a", "n": 5, "k": 3, "Q0": "identity-frame",
            "D0": np.eye(3).tolist(),
            "B0": [[0.5, 0.0, 0.0], [0.0, 0.5, 0.0]],
            "T0": (0.5 * np.eye(3)).tolist(),
            "t_max": 1.0,
            "outputs": [{"kind": "csv", "path": "ex3-a.csv"}, {"kind": "svg", "path": "ex3-a.svg"}],
        },
        checks=[_example3_checks, monitor_checks(commuting=True), quotient_oracle_check],
    ),
    "ex3-b": Reproduction(
        id="ex3-b",
        description="n=5, k=3 coupled data: conservation monitors and quotient oracle",
        config={
            "label": "ex3-b", "n": 5, "k": 3, "Q0": "identity-frame",
            "D0": np.eye(3).tolist(),
            "B0": [[0.5, 0.25, -0.2], [-0.3, 0.5, 0.0]],
            "T0": [[0.15, -0.35, 0.2], [0.5, -0.25, 0.1], [-0.5, 0.5, 0.0]],
            "t_max": 1.0,
            "outputs": [{"kind": "csv", "path": "ex3-b.csv"}, {"kind": "svg", "path": "ex3-b.svg"}],
        },
        checks=[monitor_checks(commuting=False), quotient_oracle_check],
    ),
}


def get_reproduction(example_id: str) -> Reproduction:
    try:
        return REPRODUCTIONS[example_id]
    except KeyError:
        raise KeyError(f"unknown example id {example_id!r}; choose from {', '.join(REPRODUCTIONS)}")
