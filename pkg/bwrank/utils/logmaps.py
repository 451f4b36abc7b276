"""
Logarithm index sets between Σ₁ = XXᵀ and Σ₂ = YYᵀ.

With XᵀY = U diag(σ) Vᵀ and l = rank(XᵀY), every rotation

    R = V diag(I_l, R_r) Uᵀ,   R_r ∈ O(r),  r = k − l,

satisfies XᵀY R = (XᵀYYᵀX)^{1/2}, and every rotation that does arises this way.
r also counts the principal angles equal to π/2 between span X and span Y;
both counts are computed and must agree.
"""

import logging
from dataclasses import dataclass, field
from typing import Iterable, List, Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray

from bwrank.config import Settings
from bwrank.utils.errors import (
    CertificateError,
    CountMismatchError,
    DimensionMismatchError,
    NotOrthogonalError,
    RankError,
)
from bwrank.utils.manifolds import principal_cosines
from bwrank.utils.matkernels import (
    EPS,
    orthonormality_residual,
    psd_sqrt,
    random_orthogonal,
    symmetrize,
    thin_svd,
)

logger = logging.getLogger(__name__)

_DEFAULTS = Settings()


@dataclass(frozen=True, eq=False)
class LogIndexParams:
    U: NDArray[np.float64]
    sigma: NDArray[np.float64]
    V: NDArray[np.float64]
    l: int
    r: int
    cross: NDArray[np.float64]
    target: NDArray[np.float64]
    angles: NDArray[np.float64] = field(default_factory=lambda: np.zeros(0))
    warnings: Tuple[str, ...] = ()

    @property
    def k(self) -> int:
        return self.sigma.size

    @property
    def sigma_max(self) -> float:
        return float(self.sigma[0]) if self.sigma.size else 0.0

    @property
    def unique(self) -> bool:
        return self.r == 0


def _orthonormal_basis(F: NDArray[np.float64], name: str, rank_tol: float) -> Tuple[NDArray[np.float64], float]:
    U, sigma, _ = thin_svd(F)
    if sigma.size == 0 or sigma[0] == 0.0:
        raise RankError(f"{name} is zero", rank=0, expected=F.shape[1])
    rank = int(np.sum(sigma > rank_tol * sigma[0]))
    if rank < F.shape[1]:
        raise RankError(f"{name} does not have full column rank ({rank} < {F.shape[1]})",
                        rank=rank, expected=F.shape[1])
    return U, float(sigma[0])


def log_index_params(X: ArrayLike, Y: ArrayLike, rank_tol: float = _DEFAULTS.rank_tol,
                     angle_tol: float = _DEFAULTS.angle_tol) -> LogIndexParams:
    """SVD parameterization of the index set, with the principal-angle cross-check."""
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    if X.ndim != 2 or X.shape != Y.shape:
        raise DimensionMismatchError(f"X and Y must be n×k of equal shape, got {X.shape} and {Y.shape}")
    Qx, sx = _orthonormal_basis(X, "X", rank_tol)
    Qy, sy = _orthonormal_basis(Y, "Y", rank_tol)

    cross = X.T @ Y
    U, sigma, V = thin_svd(cross)
    l = int(np.sum(sigma > rank_tol * sx * sy))
    r = sigma.size - l

    cosines = principal_cosines(Qx, Qy)
    angle_count = int(np.sum(cosines <= angle_tol))
    if angle_count != r:
        raise CountMismatchError(
            f"rank defect of XᵀY is {r} but {angle_count} principal angles are orthogonal",
            svd_count=r, angle_count=angle_count)

    warnings = []
    for c in cosines:
        if angle_tol / 10.0 < c <= 10.0 * angle_tol:
            msg = f"principal angle cosine {c:.3e} is within 10x of the orthogonality threshold {angle_tol:.1e}"
            logger.warning(msg)
            warnings.append(msg)

    # eigen-root of XᵀYYᵀX, independent of the SVD that builds R; eigenvalues under
    # the larger of rank_tol² and the eigensolver's roundoff floor are exact zeros
    floor = max(rank_tol ** 2, 10.0 * sigma.size * EPS)
    target = psd_sqrt(symmetrize(cross @ cross.T), zero_tol=floor).entries
    return LogIndexParams(U=U, sigma=sigma, V=V, l=l, r=r, cross=cross, target=target,
                          angles=np.arccos(cosines), warnings=tuple(warnings))


def log_rank(X: ArrayLike, Y: ArrayLike, rank_tol: float = _DEFAULTS.rank_tol,
             angle_tol: float = _DEFAULTS.angle_tol) -> Tuple[int, int]:
    """(l, r) = (rank XᵀY, k − rank XᵀY)."""
    p = log_index_params(X, Y, rank_tol, angle_tol)
    return p.l, p.r


def certificate_residual(p: LogIndexParams, R: ArrayLike) -> float:
    """‖XᵀY R − (XᵀYYᵀX)^{1/2}‖_F."""
    return float(np.linalg.norm(p.cross @ np.asarray(R) - p.target))


def build_log_rotation(p: LogIndexParams, Rr: ArrayLike,
                       tol: float = _DEFAULTS.certificate_tol) -> NDArray[np.float64]:
    """R = V diag(I_l, R_r) Uᵀ, certified against XᵀY R = (XᵀYYᵀX)^{1/2}."""
    Rr = np.asarray(Rr, dtype=np.float64).reshape(p.r, p.r)
    if p.r and orthonormality_residual(Rr) > 1e-10:
        raise NotOrthogonalError("R_r is not orthogonal", residual=orthonormality_residual(Rr))
    middle = np.eye(p.k)
    middle[p.l:, p.l:] = Rr
    R = p.V @ middle @ p.U.T
    residual = certificate_residual(p, R)
    bound = tol * (1.0 + p.sigma_max)
    if residual > bound:
        logger.error("certificate failed: residual %.3e > %.3e", residual, bound)
        raise CertificateError(f"XᵀY R misses (XᵀYYᵀX)^(1/2) by {residual:.3e}",
                               residual=residual, tolerance=bound)
    return R


def decompose_log_rotation(p: LogIndexParams, R: ArrayLike) -> NDArray[np.float64]:
    """Recover R_r as the trailing r×r block of VᵀRU."""
    M = p.V.T @ np.asarray(R, dtype=np.float64) @ p.U
    return M[p.l:, p.l:]


def sample_log_family(p: LogIndexParams, seeds: Iterable[int],
                      tol: float = _DEFAULTS.certificate_tol) -> List[NDArray[np.float64]]:
    """Certified rotations for R_r drawn from both components of O(r); duplicates dropped."""
    if p.r == 0:
        return [build_log_rotation(p, np.zeros((0, 0)), tol)]
    family: List[NDArray[np.float64]] = []
    for seed in seeds:
        for det_sign in (1, -1):
            R = build_log_rotation(p, random_orthogonal(p.r, seed, det_sign), tol)
            if all(np.linalg.norm(R - other) > 1e-9 for other in family):
                family.append(R)
    return family
