"""
Quotient-picture oracles.

Sym(n,k) is the quotient of full-rank n×k matrices by O(k), X ↦ XXᵀ. A BW
geodesic is the image of a straight line X₀ + tH whose velocity is horizontal
(X₀ᵀH symmetric). These helpers build that line from bundle data so the
integrator can be cross-checked against it.
"""

import numpy as np
from numpy.typing import ArrayLike, NDArray

from bwrank.config import Settings
from bwrank.utils.bwgeom import AmbientTangent, PsdFixedRank, dphi_inv
from bwrank.utils.errors import DimensionMismatchError, RankError
from bwrank.utils.manifolds import BundlePoint
from bwrank.utils.matkernels import psd_sqrt, sylvester_solve, thin_svd

_DEFAULTS = Settings()


def lift_base(P: BundlePoint) -> NDArray[np.float64]:
    """X₀ = Q D^{1/2}."""
    return P.Q @ psd_sqrt(P.D).entries


def horizontal_lift(P: BundlePoint, V,
                    tangency_tol: float = _DEFAULTS.tangency_tol) -> NDArray[np.float64]:
    """H with HX₀ᵀ + X₀Hᵀ = V and X₀ᵀH symmetric.

    In frame coordinates V = dφ(Q_⊥B, T), and H = (Q_⊥B + QS)D^{1/2} with
    DS + SD = T meets both constraints; X₀ᵀH = D^{1/2}SD^{1/2}.
    """
    Vm = V.V if isinstance(V, AmbientTangent) else AmbientTangent(V).V
    if Vm.shape != (P.n, P.n):
        raise DimensionMismatchError(f"V must be {P.n}×{P.n}, got {Vm.shape}")
    W = dphi_inv(P, Vm, tol=tangency_tol)
    S = sylvester_solve(P.D, W.T).entries
    return (P.Qperp @ W.B + P.Q @ S) @ psd_sqrt(P.D).entries


def quotient_line_oracle(X0: ArrayLike, H: ArrayLike, t: float,
                         rank_tol: float = _DEFAULTS.rank_tol) -> PsdFixedRank:
    """(X₀ + tH)(X₀ + tH)ᵀ; a rank drop means the line has left the stratum."""
    X0 = np.asarray(X0, dtype=np.float64)
    H = np.asarray(H, dtype=np.float64)
    if X0.shape != H.shape:
        raise DimensionMismatchError(f"X0 and H must share a shape, got {X0.shape} and {H.shape}")
    X = X0 + t * H
    k = X.shape[1]
    _, sigma, _ = thin_svd(X)
    rank = int(np.sum(sigma > rank_tol * sigma[0])) if sigma.size and sigma[0] > 0 else 0
    if rank < k:
        raise RankError(f"X0 + tH lost rank at t={t}: rank {rank} < {k}", rank=rank, expected=k)
    return PsdFixedRank.from_matrix(X @ X.T, k=k, rank_tol=rank_tol)
