"""
Random inputs for the invariant suite and the tests.

All draws go through a numpy Generator so a seed fixes every sample.
"""

import numpy as np
import scipy.linalg as la
from numpy.typing import NDArray

from bwrank.utils.geodesics import GeodesicState
from bwrank.utils.manifolds import BundlePoint, BundleTangent, Frame
from bwrank.utils.matkernels import SpdMatrix, SymMatrix, fix_column_signs


def random_sym(rng: np.random.Generator, k: int, scale: float = 1.0) -> SymMatrix:
    M = rng.standard_normal((k, k))
    return SymMatrix(scale * (M + M.T) / 2.0)


def random_spd(rng: np.random.Generator, k: int, floor: float = 0.5) -> SpdMatrix:
    """MMᵀ/k + floor·I, eigenvalues bounded below by floor."""
    M = rng.standard_normal((k, k))
    return SpdMatrix(M @ M.T / k + floor * np.eye(k))


def random_orthogonal_matrix(rng: np.random.Generator, r: int) -> NDArray[np.float64]:
    Q, R = la.qr(rng.standard_normal((r, r)))
    return Q * np.sign(np.diag(R))


def random_frame(rng: np.random.Generator, n: int, k: int) -> Frame:
    F = random_orthogonal_matrix(rng, n)
    F, _ = fix_column_signs(F)
    return Frame(F[:, :k], F[:, k:])


def random_bundle_point(rng: np.random.Generator, n: int, k: int) -> BundlePoint:
    return BundlePoint(random_frame(rng, n, k), random_spd(rng, k))


def _scaled(rng: np.random.Generator, M: NDArray[np.float64], scale: float) -> NDArray[np.float64]:
    norm = float(np.linalg.norm(M))
    if norm == 0.0:
        return M
    return M * (scale * rng.uniform(0.2, 1.0) / norm)


def random_bundle_tangent(rng: np.random.Generator, n: int, k: int, scale: float = 1.0) -> BundleTangent:
    B = _scaled(rng, rng.standard_normal((n - k, k)), scale)
    T = random_sym(rng, k).entries
    return BundleTangent(B, SymMatrix(_scaled(rng, T, scale)))


def random_geodesic_state(rng: np.random.Generator, n: int, k: int, scale: float = 0.5,
                          vertical: bool = False) -> GeodesicState:
    """Initial state with ‖B‖_F, ‖S‖_F ≤ scale; B = 0 when vertical."""
    P = random_bundle_point(rng, n, k)
    B = np.zeros((n - k, k)) if vertical else _scaled(rng, rng.standard_normal((n - k, k)), scale)
    S = _scaled(rng, random_sym(rng, k).entries, scale)
    return GeodesicState(Q=P.Q, Qperp=P.Qperp, D=P.D.entries, B=B, S=S)


def random_full_rank(rng: np.random.Generator, n: int, k: int) -> NDArray[np.float64]:
    """n×k with singular values in [0.5, 2]."""
    U = random_orthogonal_matrix(rng, n)[:, :k]
    V = random_orthogonal_matrix(rng, k)
    return U @ np.diag(rng.uniform(0.5, 2.0, size=k)) @ V.T
