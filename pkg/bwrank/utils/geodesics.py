"""
Geodesic system on M(n,k) with a fixed-step RK4 integrator and invariant monitors.

State (Q, Q_⊥, D, B, S) evolves by

    Q̇ = Q_⊥B,  Q̇_⊥ = −QBᵀ,  Ḋ = DS + SD,  Ṡ = BᵀB − S²,

with the horizontal equation Ḃ = −2BS ("geodesic", the default). The
"printed" variant Ḃ = −BD⁻¹(DS + SD) coincides with it whenever D and S
commute (k = 1, diagonal data, fiber motion).
"""

import logging
from dataclasses import dataclass
from typing import Any, Callable, Dict, List

import numpy as np
import scipy.linalg as la
from numpy.typing import ArrayLike, NDArray

from bwrank.config import Settings
from bwrank.utils.bwgeom import PsdFixedRank
from bwrank.utils.errors import (
    DimensionMismatchError,
    IntegrationBreakdown,
    NotPositiveDefiniteError,
)
from bwrank.utils.manifolds import BundlePoint, BundleTangent, max_principal_sine, orthogonal_angle_count
from bwrank.utils.matkernels import (
    EPS,
    orthonormality_residual,
    polar_orthogonal,
    random_orthogonal,
    sylvester_solve,
    sym_eig,
    symmetrize,
)

logger = logging.getLogger(__name__)

_DEFAULTS = Settings()

SYSTEMS = ("geodesic", "printed")


@dataclass(frozen=True, eq=False)
class GeodesicState:
    Q: NDArray[np.float64]
    Qperp: NDArray[np.float64]
    D: NDArray[np.float64]
    B: NDArray[np.float64]
    S: NDArray[np.float64]

    def __post_init__(self):
        Q = np.array(self.Q, dtype=np.float64)
        if Q.ndim != 2:
            raise DimensionMismatchError(f"Q must be n×k, got ndim={Q.ndim}")
        n, k = Q.shape
        shapes = {"Qperp": (n, n - k), "D": (k, k), "B": (n - k, k), "S": (k, k)}
        for name, shape in shapes.items():
            arr = np.array(getattr(self, name), dtype=np.float64).reshape(shape)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "Q", Q)

    @property
    def n(self) -> int:
        return self.Q.shape[0]

    @property
    def k(self) -> int:
        return self.Q.shape[1]

    @property
    def frame_matrix(self) -> NDArray[np.float64]:
        """𝐐 = [Q Q_⊥]."""
        return np.hstack([self.Q, self.Qperp])

    @property
    def T(self) -> NDArray[np.float64]:
        """Ḋ = DS + SD."""
        return self.D @ self.S + self.S @ self.D

    def to_vector(self) -> NDArray[np.float64]:
        return np.concatenate([a.ravel() for a in (self.Q, self.Qperp, self.D, self.B, self.S)])

    @classmethod
    def from_vector(cls, y: NDArray[np.float64], n: int, k: int) -> "GeodesicState":
        sizes = [n * k, n * (n - k), k * k, (n - k) * k, k * k]
        parts = np.split(y, np.cumsum(sizes)[:-1])
        return cls(parts[0].reshape(n, k), parts[1].reshape(n, n - k), parts[2].reshape(k, k),
                   parts[3].reshape(n - k, k), parts[4].reshape(k, k))


@dataclass
class StepMonitor:
    time: float
    energy: float
    momentum_residual: float
    bd_residual: float
    orthogonality_residual: float
    reortho_correction: float
    min_eigenvalue: float


@dataclass
class Trajectory:
    times: NDArray[np.float64]
    states: List[GeodesicState]
    monitors: List[StepMonitor]
    dt: float = _DEFAULTS.dt
    reortho: bool = True
    system: str = "geodesic"

    @property
    def final(self) -> GeodesicState:
        return self.states[-1]

    def monitor_values(self, name: str) -> NDArray[np.float64]:
        return np.array([getattr(m, name) for m in self.monitors], dtype=np.float64)

    @property
    def max_reortho_correction(self) -> float:
        """Largest single-step polar correction ‖U − F‖_F; 0 without re-orthogonalisation."""
        return float(np.max(self.monitor_values("reortho_correction")))

    def block(self, name: str) -> NDArray[np.float64]:
        """Stack of one state block over time, shape (steps, rows, cols)."""
        return np.stack([getattr(s, name) for s in self.states])


def _check_positive(D: NDArray[np.float64]) -> float:
    values = la.eigvalsh(symmetrize(D))
    lam_min, lam_max = float(values[0]), float(values[-1])
    threshold = D.shape[0] * EPS * max(lam_max, 0.0)
    if lam_min <= threshold:
        raise NotPositiveDefiniteError(f"D lost positivity: smallest eigenvalue {lam_min:.3e}",
                                       eigenvalue=lam_min, threshold=threshold)
    return lam_min


def ode_rhs(s: GeodesicState, system: str = "geodesic") -> GeodesicState:
    """Time derivative of the state, returned as a GeodesicState of derivatives."""
    if system not in SYSTEMS:
        raise ValueError(f"unknown system {system!r}, expected one of {SYSTEMS}")
    _check_positive(s.D)
    Q, Qperp, D, B, S = s.Q, s.Qperp, s.D, s.B, s.S
    T = D @ S + S @ D
    if system == "geodesic":
        dB = -2.0 * B @ S
    else:
        pair = sym_eig(D)
        D_inv = (pair.vectors / pair.values) @ pair.vectors.T
        dB = -B @ D_inv @ T
    return GeodesicState(Q=Qperp @ B, Qperp=-Q @ B.T, D=T, B=dB, S=B.T @ B - S @ S)


def momentum(s: GeodesicState) -> NDArray[np.float64]:
    """B·D; constant along geodesics whenever D and S commute."""
    return s.B @ s.D


def angular_momentum(s: GeodesicState) -> NDArray[np.float64]:
    """𝐐 [[DS − SD, (BD)ᵀ], [−BD, 0]] 𝐐ᵀ, conserved along every geodesic."""
    BD = s.B @ s.D
    top = np.hstack([s.D @ s.S - s.S @ s.D, BD.T])
    bottom = np.hstack([-BD, np.zeros((s.n - s.k, s.n - s.k))])
    F = s.frame_matrix
    return F @ np.vstack([top, bottom]) @ F.T


def energy(s: GeodesicState) -> float:
    """½Tr(BDBᵀ) + ½Tr(SDS)."""
    return 0.5 * float(np.trace(s.B @ s.D @ s.B.T) + np.trace(s.S @ s.D @ s.S))


def frame_residual(s: GeodesicState) -> float:
    return orthonormality_residual(s.frame_matrix)


def group_act_state(G: ArrayLike, s: GeodesicState) -> GeodesicState:
    """(Q, Q_⊥, D, B, S) ↦ (QG, Q_⊥, GᵀDG, BG, GᵀSG)."""
    G = np.asarray(G, dtype=np.float64)
    return GeodesicState(Q=s.Q @ G, Qperp=s.Qperp, D=G.T @ s.D @ G, B=s.B @ G, S=G.T @ s.S @ G)


def state_from_bundle(P: BundlePoint, W: BundleTangent) -> GeodesicState:
    """Initial state with S₀ = S_{D₀}(T₀)."""
    S = sylvester_solve(P.D, W.T).entries
    return GeodesicState(Q=P.Q, Qperp=P.Qperp, D=P.D.entries, B=W.B, S=S)


def _reorthogonalize(s: GeodesicState) -> tuple:
    F = s.frame_matrix
    U = polar_orthogonal(F)
    correction = float(np.linalg.norm(U - F))
    k = s.k
    fixed = GeodesicState(Q=U[:, :k], Qperp=U[:, k:], D=symmetrize(s.D), B=s.B, S=symmetrize(s.S))
    return fixed, correction


def _monitor(t: float, s: GeodesicState, ref: GeodesicState, correction: float,
             lam_min: float, L0: NDArray[np.float64]) -> StepMonitor:
    return StepMonitor(
        time=t,
        energy=energy(s),
        momentum_residual=float(np.linalg.norm(angular_momentum(s) - L0)),
        bd_residual=float(np.linalg.norm(momentum(s) - momentum(ref))),
        orthogonality_residual=frame_residual(s),
        reortho_correction=correction,
        min_eigenvalue=lam_min,
    )


def _rk4_step(f: Callable[[NDArray[np.float64]], NDArray[np.float64]],
              y: NDArray[np.float64], h: float) -> NDArray[np.float64]:
    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.5 * h * k2)
    k4 = f(y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate(s0: GeodesicState, t_max: float, dt: float = _DEFAULTS.dt,
              reortho: bool = _DEFAULTS.reortho, system: str = "geodesic") -> Trajectory:
    """Classical fixed-step RK4 from t = 0 to t_max.

    Raises IntegrationBreakdown, carrying the partial trajectory, when D stops
    being positive definite.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if t_max < 0:
        raise ValueError(f"t_max must be non-negative, got {t_max}")
    if system not in SYSTEMS:
        raise ValueError(f"unknown system {system!r}, expected one of {SYSTEMS}")

    n, k = s0.n, s0.k

    def f(y: NDArray[np.float64]) -> NDArray[np.float64]:
        return ode_rhs(GeodesicState.from_vector(y, n, k), system).to_vector()

    lam_min = _check_positive(s0.D)
    L0 = angular_momentum(s0)
    times = [0.0]
    states = [s0]
    monitors = [_monitor(0.0, s0, s0, 0.0, lam_min, L0)]
    n_steps = int(np.ceil(t_max / dt - 1e-9))

    state = s0
    t = 0.0
    for i in range(n_steps):
        t_next = min((i + 1) * dt, t_max)
        h = t_next - t
        try:
            y = _rk4_step(f, state.to_vector(), h)
            candidate = GeodesicState.from_vector(y, n, k)
            correction = 0.0
            if reortho:
                candidate, correction = _reorthogonalize(candidate)
                logger.debug("t=%.6f polar correction %.3e", t_next, correction)
            lam_min = _check_positive(candidate.D)
        except NotPositiveDefiniteError as e:
            partial = Trajectory(np.array(times), states, monitors, dt, reortho, system)
            logger.error("integration breakdown near t=%.6f: smallest eigenvalue of D %.3e",
                         t_next, e.eigenvalue)
            raise IntegrationBreakdown(
                f"D lost positivity between t={t:.6f} and t={t_next:.6f}",
                time=t_next, min_eigenvalue=e.eigenvalue, trajectory=partial) from e

        state = candidate
        t = t_next
        times.append(t)
        states.append(state)
        monitors.append(_monitor(t, state, s0, correction, lam_min, L0))

    return Trajectory(np.array(times), states, monitors, dt, reortho, system)


def pullback_curve(traj: Trajectory) -> List[PsdFixedRank]:
    """Σ(t) = Q(t)D(t)Q(t)ᵀ at every recorded time."""
    tol = _DEFAULTS.orthonormal_tol if traj.reortho else 1e-4
    return [PsdFixedRank.from_factor(s.Q, symmetrize(s.D), orthonormal_tol=tol) for s in traj.states]


def conservation_report(traj: Trajectory) -> Dict[str, float]:
    """Worst-case drift of the monitored quantities over the trajectory."""
    energies = traj.monitor_values("energy")
    E0 = float(energies[0])
    return {
        "energy_drift": float(np.max(np.abs(energies - E0))) / (1.0 + abs(E0)),
        "momentum_residual": float(np.max(traj.monitor_values("momentum_residual"))),
        "bd_residual": float(np.max(traj.monitor_values("bd_residual"))),
        "orthogonality_residual": float(np.max(traj.monitor_values("orthogonality_residual"))),
        "max_reortho_correction": traj.max_reortho_correction,
    }


def fiber_report(traj: Trajectory, angle_tol: float = _DEFAULTS.angle_tol) -> Dict[str, Any]:
    """Where span Q(t_max) sits relative to span Q(0).

    The run stays in its initial fiber when the largest principal sine is below
    angle_tol; orthogonal_angles counts cosines at or below angle_tol.
    """
    # compare spans; frames from reortho-off runs are only nearly orthonormal
    Q0, _ = la.qr(traj.states[0].Q, mode="economic")
    Qf, _ = la.qr(traj.final.Q, mode="economic")
    sine = max_principal_sine(Q0, Qf)
    return {
        "final_fiber_sine": sine,
        "stays_in_fiber": bool(sine < angle_tol),
        "orthogonal_angles": orthogonal_angle_count(Q0, Qf, angle_tol),
    }


def gauge_energy_error(s0: GeodesicState, seed: int) -> float:
    """Relative change of the energy under a seeded gauge rotation G ∈ SO(k)."""
    G = random_orthogonal(s0.k, seed, 1)
    E0 = energy(s0)
    return abs(energy(group_act_state(G, s0)) - E0) / (1.0 + abs(E0))
