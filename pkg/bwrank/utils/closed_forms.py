"""
Closed-form geodesics used as integrator oracles.

- fiber (vertical) geodesics D(t) = (I + tS₀) D₀ (I + tS₀), any k
- the rank-one family on Sym(n,1), driven by r(t) = s/‖b‖ which is linear in t
- the planar case n = 2, k = 1 written with an angle θ
- the decoupled n = 5, k = 3 example with diagonal data
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray

from bwrank.utils.errors import DimensionMismatchError, DomainExceededError
from bwrank.utils.geodesics import GeodesicState
from bwrank.utils.manifolds import Frame
from bwrank.utils.matkernels import SpdMatrix, as_spd, as_sym


def vertical_domain(S0: ArrayLike) -> Tuple[float, float]:
    """Open interval of t on which I + tS₀ stays invertible around t = 0."""
    values = np.linalg.eigvalsh(as_sym(S0).entries)
    lower = -1.0 / values[-1] if values.size and values[-1] > 0 else -np.inf
    upper = -1.0 / values[0] if values.size and values[0] < 0 else np.inf
    return float(lower), float(upper)


def vertical_geodesic(D0: ArrayLike, S0: ArrayLike, t: float) -> SpdMatrix:
    """(I + tS₀) D₀ (I + tS₀)."""
    D = as_spd(D0)
    S = as_sym(S0)
    if S.dim != D.dim:
        raise DimensionMismatchError(f"D0 is {D.dim}×{D.dim} but S0 is {S.dim}×{S.dim}")
    lower, upper = vertical_domain(S)
    if not lower < t < upper:
        bound = upper if t >= upper else lower
        raise DomainExceededError(f"t={t} outside the fiber geodesic domain ({lower}, {upper})",
                                  t=float(t), t_max=bound)
    M = np.eye(D.dim) + t * S.entries
    return SpdMatrix(M @ D.entries @ M)


@dataclass(frozen=True)
class RankOneParams:
    """Constants of a rank-one geodesic: r(t) = r0 + c_tilde·t."""
    b_norm: float
    r0: float
    c_tilde: float
    b_hat: NDArray[np.float64]


def _rank_one_params(b0: ArrayLike, s0: float) -> RankOneParams:
    b0 = np.asarray(b0, dtype=np.float64).ravel()
    b_norm = float(np.linalg.norm(b0))
    if b_norm == 0.0:
        raise ValueError("k1_geodesic needs b0 != 0; use vertical_geodesic for fiber motion")
    r0 = float(s0) / b_norm
    return RankOneParams(b_norm=b_norm, r0=r0, c_tilde=b_norm * (r0 * r0 + 1.0), b_hat=b0 / b_norm)


def _unit(q0: ArrayLike) -> NDArray[np.float64]:
    q0 = np.asarray(q0, dtype=np.float64).ravel()
    norm = float(np.linalg.norm(q0))
    if abs(norm - 1.0) > 1e-10:
        raise DimensionMismatchError(f"q0 must be a unit vector, got norm {norm}")
    return q0


def k1_state(q0: ArrayLike, d0: float, b0: ArrayLike, s0: float, t: float,
             Qperp0: Optional[ArrayLike] = None) -> GeodesicState:
    """Full closed-form state (q, Q_⊥, d, b, s) of a rank-one geodesic at time t."""
    q0 = _unit(q0)
    n = q0.size
    if Qperp0 is None:
        Qperp0 = Frame.from_basis(q0.reshape(n, 1)).Qperp
    Qperp0 = np.asarray(Qperp0, dtype=np.float64).reshape(n, n - 1)
    if d0 <= 0:
        raise ValueError(f"d0 must be positive, got {d0}")
    p = _rank_one_params(b0, s0)

    r = p.r0 + p.c_tilde * t
    theta = np.arctan(r) - np.arctan(p.r0)
    w0 = Qperp0 @ p.b_hat
    q = np.cos(theta) * q0 + np.sin(theta) * w0
    Qperp = Qperp0 + np.outer((np.cos(theta) - 1.0) * w0 - np.sin(theta) * q0, p.b_hat)

    beta = p.c_tilde / (1.0 + r * r)
    d = d0 * (1.0 + r * r) / (1.0 + p.r0 * p.r0)
    return GeodesicState(Q=q.reshape(n, 1), Qperp=Qperp, D=[[d]],
                         B=(beta * p.b_hat).reshape(n - 1, 1), S=[[beta * r]])


def k1_geodesic(q0: ArrayLike, d0: float, b0: ArrayLike, s0: float, t: float,
                Qperp0: Optional[ArrayLike] = None) -> Tuple[NDArray[np.float64], float]:
    """(q(t), d(t)) with q = cos θ q₀ + sin θ w₀ and d = d₀(1 + r²)/(1 + r₀²)."""
    state = k1_state(q0, d0, b0, s0, t, Qperp0)
    return state.Q[:, 0], float(state.D[0, 0])


def example1_theta(theta0: float, d0: float, b0: float, s0: float, t: float) -> Tuple[float, float]:
    """Planar rank-one geodesic (n = 2): returns (θ(t), d(t)) for signed b₀ ≠ 0."""
    if b0 == 0.0:
        raise ValueError("example1_theta needs b0 != 0")
    r0 = s0 / b0
    C = b0 * (r0 * r0 + 1.0)
    r = C * t + r0
    theta = theta0 + np.arctan(r) - np.arctan(r0)
    d = d0 * (r * r + 1.0) / (r0 * r0 + 1.0)
    return float(theta), float(d)


def planar_state(theta: float, d: float, b: float, s: float) -> GeodesicState:
    """State on Sym(2,1) with q = (cos θ, sin θ) and q_⊥ = (−sin θ, cos θ)."""
    c, si = np.cos(theta), np.sin(theta)
    return GeodesicState(Q=[[c], [si]], Qperp=[[-si], [c]], D=[[d]], B=[[b]], S=[[s]])


def example3_r(t: float) -> float:
    return 0.5 + 0.625 * t


def example3_frame(theta: float) -> NDArray[np.float64]:
    """5×5 frame rotating the (e₁, e₄) and (e₂, e₅) planes by θ."""
    F = np.eye(5)
    c, s = np.cos(theta), np.sin(theta)
    for i, j in ((0, 3), (1, 4)):
        F[i, i] = F[j, j] = c
        F[j, i] = s
        F[i, j] = -s
    return F


def example3_diagonal(t: float) -> GeodesicState:
    """Closed-form state of the n = 5, k = 3 example with D₀ = I, S₀ = I/4, B₀ = ½[I₂ 0]."""
    r = example3_r(t)
    one_r2 = 1.0 + r * r
    d = 0.8 * one_r2
    b = 5.0 / (8.0 * one_r2)
    s = 5.0 * r / (8.0 * one_r2)
    d3 = (1.0 + t / 4.0) ** 2
    s3 = 0.25 / (1.0 + t / 4.0)
    theta = np.arctan(r) - np.arctan(0.5)
    F = example3_frame(theta)
    B = np.zeros((2, 3))
    B[0, 0] = B[1, 1] = b
    return GeodesicState(Q=F[:, :3], Qperp=F[:, 3:], D=np.diag([d, d, d3]), B=B, S=np.diag([s, s, s3]))
