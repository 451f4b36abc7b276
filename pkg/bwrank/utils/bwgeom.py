"""
Bures–Wasserstein geometry of the fixed-rank stratum Sym(n,k).

φ([Q, D]) = QDQᵀ identifies the associated bundle with the stratum. This module
holds φ, its inverse and differential, the ambient BW metric, the pullback metric
on the bundle, and the BW distance with an independent Procrustes evaluation.
"""

from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np
import scipy.linalg as la
from numpy.typing import ArrayLike, NDArray

from bwrank.config import Settings
from bwrank.utils.errors import (
    DimensionMismatchError,
    NonFiniteError,
    NotPositiveSemidefiniteError,
    RankError,
    TangencyError,
)
from bwrank.utils.manifolds import BundlePoint, BundleTangent, StiefelPoint
from bwrank.utils.matkernels import (
    SpdMatrix,
    SymMatrix,
    as_sym,
    polar_orthogonal,
    psd_sqrt,
    sylvester_solve,
    sym_eig,
    symmetrize,
    thin_svd,
)

_DEFAULTS = Settings()


@dataclass(frozen=True, eq=False)
class PsdFixedRank:
    """Σ ∈ Sym(n,k) with its cached factorization Σ = QDQᵀ."""
    Sigma: NDArray[np.float64]
    Q: StiefelPoint
    D: SpdMatrix

    def __post_init__(self):
        Sigma = symmetrize(self.Sigma)
        Q = self.Q if isinstance(self.Q, StiefelPoint) else StiefelPoint(self.Q)
        if Sigma.shape != (Q.n, Q.n):
            raise DimensionMismatchError(f"Sigma is {Sigma.shape}, factor expects {Q.n}×{Q.n}")
        if self.D.dim != Q.k:
            raise DimensionMismatchError(f"D is {self.D.dim}×{self.D.dim}, factor expects k={Q.k}")
        mismatch = float(np.linalg.norm(Sigma - Q.Q @ self.D.entries @ Q.Q.T))
        if mismatch > 1e-9 * max(float(np.linalg.norm(Sigma)), 1e-300):
            raise DimensionMismatchError(f"cached factor does not reproduce Sigma (error {mismatch:.3e})",
                                         {"error": mismatch})
        Sigma.setflags(write=False)
        object.__setattr__(self, "Sigma", Sigma)
        object.__setattr__(self, "Q", Q)

    @property
    def n(self) -> int:
        return self.Q.n

    @property
    def k(self) -> int:
        return self.Q.k

    @classmethod
    def from_factor(cls, Q: ArrayLike, D: ArrayLike,
                    orthonormal_tol: float = _DEFAULTS.orthonormal_tol) -> "PsdFixedRank":
        point = Q if isinstance(Q, StiefelPoint) else StiefelPoint(np.asarray(Q), tol=orthonormal_tol)
        Dm = D if isinstance(D, SpdMatrix) else SpdMatrix(np.asarray(D))
        return cls(point.Q @ Dm.entries @ point.Q.T, point, Dm)

    @classmethod
    def from_matrix(cls, Sigma: ArrayLike, k: Optional[int] = None,
                    rank_tol: float = _DEFAULTS.rank_tol,
                    psd_tol: float = _DEFAULTS.psd_clamp_tol) -> "PsdFixedRank":
        """Factor Σ through its top eigenpairs; the rank is detected when k is None."""
        values, vectors = _psd_spectrum(Sigma, psd_tol)
        lam_max = float(values[0]) if values.size else 0.0
        rank = int(np.sum(values > rank_tol * lam_max)) if lam_max > 0 else 0
        if k is not None and rank != k:
            raise RankError(f"numerical rank is {rank}, expected {k}", rank=rank, expected=k)
        if rank == 0:
            raise RankError("zero matrix is not in any stratum Sym(n,k) with k >= 1", rank=0, expected=k)
        Q = vectors[:, :rank]
        D = SpdMatrix(np.diag(values[:rank]))
        return cls(np.asarray(Sigma, dtype=np.float64), StiefelPoint(Q), D)


@dataclass(frozen=True, eq=False)
class AmbientTangent:
    """Symmetric V with P_Σ^⊥ V P_Σ^⊥ = 0 for the Σ it is attached to."""
    V: NDArray[np.float64]

    def __post_init__(self):
        V = np.array(self.V, dtype=np.float64)
        if V.ndim != 2 or V.shape[0] != V.shape[1]:
            raise DimensionMismatchError(f"ambient tangent must be square, got {V.shape}")
        V = symmetrize(V)
        V.setflags(write=False)
        object.__setattr__(self, "V", V)


def _psd_spectrum(Sigma: ArrayLike, psd_tol: float) -> Tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Descending eigenvalues (roundoff negatives clamped) and matching vectors."""
    arr = np.array(Sigma, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError("matrix has non-finite entries")
    pair = sym_eig(arr)
    values = pair.values[::-1]
    vectors = pair.vectors[:, ::-1]
    if values.size:
        scale = float(np.max(np.abs(values)))
        if values[-1] < -psd_tol * scale:
            raise NotPositiveSemidefiniteError(
                f"matrix is not PSD: eigenvalue {values[-1]:.3e}",
                eigenvalue=float(values[-1]), threshold=float(-psd_tol * scale))
    return np.clip(values, 0.0, None), vectors


def _as_tangent(V: Union[AmbientTangent, ArrayLike]) -> NDArray[np.float64]:
    return V.V if isinstance(V, AmbientTangent) else AmbientTangent(V).V


def _check_ambient_tangent(Qperp: NDArray[np.float64], V: NDArray[np.float64], tol: float) -> None:
    residual = float(np.linalg.norm(Qperp.T @ V @ Qperp))
    if residual > tol * max(1.0, float(np.linalg.norm(V))):
        raise TangencyError(f"P⊥VP⊥ = {residual:.3e}, V is not tangent to the stratum", residual=residual)


def _complement(Q: NDArray[np.float64]) -> NDArray[np.float64]:
    n, k = Q.shape
    full, _ = la.qr(Q, mode="full")
    return full[:, k:]


def phi(P: BundlePoint) -> PsdFixedRank:
    """φ([Q, D]) = QDQᵀ."""
    return PsdFixedRank(P.image(), P.frame.Q, P.D)


def phi_inv(S: Union[PsdFixedRank, ArrayLike], k: Optional[int] = None,
            rank_tol: float = _DEFAULTS.rank_tol) -> BundlePoint:
    """Representative from the top-k eigenpairs of Σ (descending, sign-fixed)."""
    if isinstance(S, PsdFixedRank):
        factored = PsdFixedRank.from_matrix(S.Sigma, k=S.k if k is None else k, rank_tol=rank_tol)
    else:
        factored = PsdFixedRank.from_matrix(S, k=k, rank_tol=rank_tol)
    return BundlePoint.from_arrays(factored.Q.Q, factored.D.entries)


def dphi_total(P: BundlePoint, V: ArrayLike, T: ArrayLike) -> AmbientTangent:
    """Differential of (Q, D) ↦ QDQᵀ on St(n,k) × Sym⁺(k): VDQᵀ + QDVᵀ + QTQᵀ."""
    V = np.asarray(V, dtype=np.float64)
    T = as_sym(T).entries
    Q, D = P.Q, P.D.entries
    VDQt = V @ D @ Q.T
    return AmbientTangent(VDQt + VDQt.T + Q @ T @ Q.T)


def dphi(P: BundlePoint, W: BundleTangent) -> AmbientTangent:
    """dφ(Q_⊥B, T) = Q_⊥BDQᵀ + QDBᵀQ_⊥ᵀ + QTQᵀ."""
    return dphi_total(P, P.Qperp @ W.B, W.T)


def dphi_inv(P: BundlePoint, V: Union[AmbientTangent, ArrayLike],
             tol: float = _DEFAULTS.tangency_tol) -> BundleTangent:
    Vm = _as_tangent(V)
    _check_ambient_tangent(P.Qperp, Vm, tol)
    Q, Qperp = P.Q, P.Qperp
    T = Q.T @ Vm @ Q
    B = Qperp.T @ Vm @ Q @ P.D.inverse
    return BundleTangent(B, SymMatrix(T))


def ambient_metric(S: PsdFixedRank, V: Union[AmbientTangent, ArrayLike],
                   W: Union[AmbientTangent, ArrayLike], tol: float = _DEFAULTS.tangency_tol) -> float:
    """g(V, W) = Tr(S_{Σ,V} Σ S_{Σ,W}) + Tr(P⊥ V Σ† W), through the cached factor."""
    Vm, Wm = _as_tangent(V), _as_tangent(W)
    Q, D = S.Q.Q, S.D
    Qperp = _complement(Q)
    _check_ambient_tangent(Qperp, Vm, tol)
    _check_ambient_tangent(Qperp, Wm, tol)

    SV = Q @ sylvester_solve(D, Q.T @ Vm @ Q).entries @ Q.T
    SW = Q @ sylvester_solve(D, Q.T @ Wm @ Q).entries @ Q.T
    pinv = Q @ D.inverse @ Q.T
    P_perp = np.eye(S.n) - Q @ Q.T
    return float(np.trace(SV @ S.Sigma @ SW) + np.trace(P_perp @ Vm @ pinv @ Wm))


def metric_split(P: BundlePoint, W1: BundleTangent, W2: BundleTangent) -> Tuple[float, float]:
    """(h_hor, h_ver) = (Tr(B₁DB₂ᵀ), Tr(S_D(T₁) D S_D(T₂)))."""
    D = P.D
    h_hor = float(np.trace(W1.B @ D.entries @ W2.B.T))
    S1 = sylvester_solve(D, W1.T).entries
    S2 = sylvester_solve(D, W2.T).entries
    h_ver = float(np.trace(S1 @ D.entries @ S2))
    return h_hor, h_ver


def bundle_metric(P: BundlePoint, W1: BundleTangent, W2: BundleTangent) -> float:
    h_hor, h_ver = metric_split(P, W1, W2)
    return h_hor + h_ver


def _psd_array(S: Union[PsdFixedRank, ArrayLike], psd_tol: float) -> NDArray[np.float64]:
    if isinstance(S, PsdFixedRank):
        return np.asarray(S.Sigma)
    arr = np.array(S, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got shape {arr.shape}")
    asym = float(np.linalg.norm(arr - arr.T))
    if asym > 1e-10 * max(1.0, float(np.linalg.norm(arr))):
        raise NotPositiveSemidefiniteError(f"matrix is not symmetric (asymmetry {asym:.3e})",
                                           eigenvalue=float("nan"), threshold=0.0)
    _psd_spectrum(arr, psd_tol)
    return symmetrize(arr)


def bw_distance(S1: Union[PsdFixedRank, ArrayLike], S2: Union[PsdFixedRank, ArrayLike],
                psd_tol: float = _DEFAULTS.psd_clamp_tol, rank_tol: float = _DEFAULTS.rank_tol) -> float:
    """d² = Tr Σ + Tr Λ − 2 Tr((Σ^{1/2} Λ Σ^{1/2})^{1/2}); rank-agnostic.

    Evaluated as the residual ‖Σ^{1/2} − Λ^{1/2}R‖_F with R the orthogonal polar
    factor of Λ^{1/2}Σ^{1/2}; the traces never cancel against the nuclear norm.
    Root eigenvalues below rank_tol·λ_max are set to zero.
    """
    A = _psd_array(S1, psd_tol)
    B = _psd_array(S2, psd_tol)
    if A.shape != B.shape:
        raise DimensionMismatchError(f"distance needs equal sizes, got {A.shape} and {B.shape}")
    if A.size == 0 or np.array_equal(A, B):
        return 0.0
    root_a = psd_sqrt(A, psd_tol, zero_tol=rank_tol).entries
    root_b = psd_sqrt(B, psd_tol, zero_tol=rank_tol).entries
    R = polar_orthogonal(root_b.T @ root_a)
    return float(np.linalg.norm(root_a - root_b @ R))


def bw_distance_procrustes(X: ArrayLike, Y: ArrayLike, rank_tol: float = _DEFAULTS.rank_tol,
                           require_full_rank: bool = True) -> float:
    """min over R ∈ O(k) of ‖X − YR‖_F, attained at the polar factor of YᵀX."""
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    if X.shape != Y.shape:
        raise DimensionMismatchError(f"factors must share a shape, got {X.shape} and {Y.shape}")
    if require_full_rank:
        for name, F in (("X", X), ("Y", Y)):
            _, sigma, _ = thin_svd(F)
            rank = int(np.sum(sigma > rank_tol * sigma[0])) if sigma.size and sigma[0] > 0 else 0
            if rank < F.shape[1]:
                raise RankError(f"{name} is rank deficient ({rank} < {F.shape[1]})",
                                rank=rank, expected=F.shape[1])
    if X.size == 0:
        return 0.0
    R = polar_orthogonal(Y.T @ X)
    return float(np.linalg.norm(X - Y @ R))


def psd_factor(Sigma: ArrayLike, psd_tol: float = _DEFAULTS.psd_clamp_tol,
               rank_tol: float = _DEFAULTS.rank_tol) -> NDArray[np.float64]:
    """Square factor X = V Λ^{1/2} with XXᵀ = Σ; zero columns span the nullspace.

    Eigenvalues at or below rank_tol·λ_max count as zeros, as in bw_distance.
    """
    values, vectors = _psd_spectrum(Sigma, psd_tol)
    if values.size:
        values = np.where(values <= rank_tol * values[0], 0.0, values)
    return vectors * np.sqrt(values)
