"""
Point and tangent types for St(n,k), Gr(k,n) and the associated bundle
M(n,k) = St(n,k) ×_{O(k)} Sym⁺(k), with the tangent splittings, the
Grassmann projection differential, principal angles and the right O(k) action.

Frames are always carried explicitly; B-blocks are coordinates in the
frame's complement and are never compared across different frames.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import scipy.linalg as la
from numpy.typing import ArrayLike, NDArray

from bwrank.config import Settings
from bwrank.utils.errors import (
    DimensionMismatchError,
    NotOrthogonalError,
    SubspaceMismatchError,
    TangencyError,
)
from bwrank.utils.matkernels import (
    SpdMatrix,
    SymMatrix,
    as_spd,
    as_sym,
    fix_column_signs,
    orthonormality_residual,
    skew,
)

_DEFAULTS = Settings()


def _matrix(a: ArrayLike, name: str) -> NDArray[np.float64]:
    arr = np.array(a, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise DimensionMismatchError(f"{name} must be a matrix, got ndim={arr.ndim}")
    return arr


@dataclass(frozen=True, eq=False)
class StiefelPoint:
    """n×k matrix with orthonormal columns."""
    Q: NDArray[np.float64]
    tol: float = _DEFAULTS.orthonormal_tol

    def __post_init__(self):
        Q = _matrix(self.Q, "Q")
        n, k = Q.shape
        if k > n:
            raise DimensionMismatchError(f"Stiefel point needs k <= n, got {n}×{k}", {"n": n, "k": k})
        residual = orthonormality_residual(Q)
        if residual > self.tol:
            raise NotOrthogonalError(f"QᵀQ deviates from I by {residual:.3e}", residual=residual)
        Q.setflags(write=False)
        object.__setattr__(self, "Q", Q)

    @property
    def n(self) -> int:
        return self.Q.shape[0]

    @property
    def k(self) -> int:
        return self.Q.shape[1]


def _as_stiefel(Q) -> StiefelPoint:
    return Q if isinstance(Q, StiefelPoint) else StiefelPoint(Q)


@dataclass(frozen=True, eq=False)
class Frame:
    """A Stiefel point completed to an orthonormal basis [Q Qperp] of ℝⁿ."""
    Q: StiefelPoint
    Qperp: NDArray[np.float64]

    def __post_init__(self):
        Q = _as_stiefel(self.Q)
        Qperp = np.array(self.Qperp, dtype=np.float64).reshape(Q.n, Q.n - Q.k)
        residual = orthonormality_residual(np.hstack([Q.Q, Qperp]))
        if residual > Q.tol:
            raise NotOrthogonalError(f"[Q Qperp] is not orthogonal: residual {residual:.3e}",
                                     residual=residual)
        Qperp.setflags(write=False)
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "Qperp", Qperp)

    @classmethod
    def from_basis(cls, Q: ArrayLike) -> "Frame":
        """Complete Q with the trailing columns of a full QR factorization."""
        point = _as_stiefel(Q)
        full, _ = la.qr(point.Q, mode="full")
        Qperp, _ = fix_column_signs(full[:, point.k:])
        return cls(point, Qperp)

    @classmethod
    def identity(cls, n: int, k: int) -> "Frame":
        eye = np.eye(n)
        return cls(StiefelPoint(eye[:, :k]), eye[:, k:])

    @property
    def n(self) -> int:
        return self.Q.n

    @property
    def k(self) -> int:
        return self.Q.k

    @property
    def full(self) -> NDArray[np.float64]:
        return np.hstack([self.Q.Q, self.Qperp])


@dataclass(frozen=True, eq=False)
class StiefelTangent:
    """Frame coordinates (A, B) of V = QA + Q_⊥B."""
    A: NDArray[np.float64]
    B: NDArray[np.float64]

    def __post_init__(self):
        A = skew(_matrix(self.A, "A"))
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", _matrix(self.B, "B"))

    def to_ambient(self, frame: Frame) -> NDArray[np.float64]:
        return frame.Q.Q @ self.A + frame.Qperp @ self.B


@dataclass(frozen=True, eq=False)
class GrassmannPoint:
    basis: StiefelPoint

    def __post_init__(self):
        object.__setattr__(self, "basis", _as_stiefel(self.basis))

    @property
    def projector(self) -> NDArray[np.float64]:
        Q = self.basis.Q
        return Q @ Q.T

    def same_subspace(self, other: "GrassmannPoint", tol: float = 1e-9) -> bool:
        if self.basis.n != other.basis.n or self.basis.k != other.basis.k:
            return False
        return float(np.linalg.norm(self.projector - other.projector)) <= tol


@dataclass(frozen=True, eq=False)
class BundleTangent:
    """Horizontal coordinate B ∈ Mat(n−k,k) and vertical coordinate T ∈ Sym(k)."""
    B: NDArray[np.float64]
    T: SymMatrix

    def __post_init__(self):
        object.__setattr__(self, "B", _matrix(self.B, "B"))
        object.__setattr__(self, "T", as_sym(self.T))

    @classmethod
    def zero(cls, n: int, k: int) -> "BundleTangent":
        return cls(np.zeros((n - k, k)), SymMatrix(np.zeros((k, k))))


@dataclass(frozen=True, eq=False)
class BundlePoint:
    """Representative (Q, D) of the class [Q, D] in M(n,k).

    Two points compare equal when their images QDQᵀ agree within 1e-9
    relative Frobenius error.
    """
    frame: Frame
    D: SpdMatrix

    def __post_init__(self):
        D = as_spd(self.D)
        if D.dim != self.frame.k:
            raise DimensionMismatchError(
                f"D is {D.dim}×{D.dim} but the frame has k={self.frame.k}",
                {"d_dim": D.dim, "k": self.frame.k})
        object.__setattr__(self, "D", D)

    @classmethod
    def from_arrays(cls, Q: ArrayLike, D: ArrayLike, Qperp: Optional[ArrayLike] = None) -> "BundlePoint":
        frame = Frame.from_basis(Q) if Qperp is None else Frame(StiefelPoint(Q), Qperp)
        return cls(frame, SpdMatrix(np.asarray(D)))

    @property
    def Q(self) -> NDArray[np.float64]:
        return self.frame.Q.Q

    @property
    def Qperp(self) -> NDArray[np.float64]:
        return self.frame.Qperp

    @property
    def n(self) -> int:
        return self.frame.n

    @property
    def k(self) -> int:
        return self.frame.k

    def image(self) -> NDArray[np.float64]:
        return self.Q @ self.D.entries @ self.Q.T

    def same_class(self, other: "BundlePoint", rtol: float = 1e-9) -> bool:
        if self.n != other.n or self.k != other.k:
            return False
        a, b = self.image(), other.image()
        scale = max(float(np.linalg.norm(a)), 1e-300)
        return float(np.linalg.norm(a - b)) <= rtol * scale

    def __eq__(self, other):
        if not isinstance(other, BundlePoint):
            return NotImplemented
        return self.same_class(other)

    __hash__ = None


def _check_tangent(frame: Frame, V: NDArray[np.float64], tol: float) -> None:
    if V.shape != (frame.n, frame.k):
        raise DimensionMismatchError(f"tangent must be {frame.n}×{frame.k}, got {V.shape}")
    QtV = frame.Q.Q.T @ V
    residual = float(np.linalg.norm(QtV + QtV.T))
    if residual > tol * max(1.0, float(np.linalg.norm(V))):
        raise TangencyError(f"QᵀV + VᵀQ = {residual:.3e}, V is not tangent at Q", residual=residual)


def stiefel_split(frame: Frame, V: ArrayLike, tol: float = _DEFAULTS.tangency_tol) -> StiefelTangent:
    """Decompose a tangent V at Q as V = QA + Q_⊥B."""
    V = _matrix(V, "V")
    _check_tangent(frame, V, tol)
    return StiefelTangent(A=frame.Q.Q.T @ V, B=frame.Qperp.T @ V)


def grassmann_dpi(frame: Frame, V: ArrayLike, tol: float = _DEFAULTS.tangency_tol) -> NDArray[np.float64]:
    """dπ_G(Q)(V) = B in the basis [Q Q_⊥]; vertical vectors QA map to zero."""
    return stiefel_split(frame, V, tol).B


def stiefel_inner(V1: ArrayLike, V2: ArrayLike) -> float:
    return float(np.trace(np.asarray(V1) @ np.asarray(V2).T))


def grassmann_inner(B1: ArrayLike, B2: ArrayLike) -> float:
    return float(np.trace(np.asarray(B1) @ np.asarray(B2).T))


def _pair(Q1, Q2) -> Tuple[StiefelPoint, StiefelPoint]:
    P1, P2 = _as_stiefel(Q1), _as_stiefel(Q2)
    if P1.Q.shape != P2.Q.shape:
        raise DimensionMismatchError(
            f"principal angles need equal shapes, got {P1.Q.shape} and {P2.Q.shape}",
            {"shape1": list(P1.Q.shape), "shape2": list(P2.Q.shape)})
    return P1, P2


def principal_cosines(Q1, Q2) -> NDArray[np.float64]:
    """Singular values of Q1ᵀQ2 clamped to [0, 1], descending."""
    P1, P2 = _pair(Q1, Q2)
    if P1.k == 0:
        return np.zeros(0)
    sigma = la.svd(P1.Q.T @ P2.Q, compute_uv=False)
    return np.clip(sigma, 0.0, 1.0)


def principal_angles(Q1, Q2) -> NDArray[np.float64]:
    """Ascending principal angles in [0, π/2] between span(Q1) and span(Q2)."""
    return np.arccos(principal_cosines(Q1, Q2))


def orthogonal_angle_count(Q1, Q2, angle_tol: float = _DEFAULTS.angle_tol) -> int:
    """Number of principal angles equal to π/2, judged by cosine ≤ angle_tol."""
    return int(np.sum(principal_cosines(Q1, Q2) <= angle_tol))


def max_principal_sine(Q1, Q2) -> float:
    """sin of the largest principal angle, ‖(I − Q1Q1ᵀ)Q2‖₂.

    Accurate for nearly equal subspaces, where arccos of a cosine close to 1 is not.
    """
    P1, P2 = _pair(Q1, Q2)
    if P1.k == 0:
        return 0.0
    residual = P2.Q - P1.Q @ (P1.Q.T @ P2.Q)
    return float(la.norm(residual, 2))


def fiber_chart(Q0, P: BundlePoint, angle_tol: float = _DEFAULTS.angle_tol) -> SpdMatrix:
    """ψ⁻¹([Q, S]) = (Q0ᵀQ) S (QᵀQ0) on the fiber over span(Q0)."""
    base = _as_stiefel(Q0)
    _pair(base, P.frame.Q)
    sine = max_principal_sine(base, P.frame.Q)
    if sine >= angle_tol:
        raise SubspaceMismatchError(
            f"span(Q) differs from span(Q0): largest principal angle {np.arcsin(min(sine, 1.0)):.3e}",
            max_angle=float(np.arcsin(min(sine, 1.0))))
    G = base.Q.T @ P.Q
    return SpdMatrix(G @ P.D.entries @ G.T)


def _check_orthogonal(G: NDArray[np.float64], k: int, tol: float) -> None:
    if G.shape != (k, k):
        raise DimensionMismatchError(f"group element must be {k}×{k}, got {G.shape}")
    residual = orthonormality_residual(G)
    if residual > tol:
        raise NotOrthogonalError(f"G is not orthogonal: residual {residual:.3e}", residual=residual)


def group_act(G: ArrayLike, P: BundlePoint, W: Optional[BundleTangent] = None,
              tol: float = _DEFAULTS.orthonormal_tol) -> Tuple[BundlePoint, Optional[BundleTangent]]:
    """Right O(k) action: (Q, D) ↦ (QG, GᵀDG), (B, T) ↦ (BG, GᵀTG); Q_⊥ unchanged."""
    G = _matrix(G, "G")
    _check_orthogonal(G, P.k, tol)
    frame = Frame(StiefelPoint(P.Q @ G), P.Qperp)
    point = BundlePoint(frame, SpdMatrix(G.T @ P.D.entries @ G))
    if W is None:
        return point, None
    return point, BundleTangent(W.B @ G, SymMatrix(G.T @ W.T.entries @ G))


def gauge_direction(P: BundlePoint, A: ArrayLike) -> Tuple[NDArray[np.float64], SymMatrix]:
    """Velocity (QA, DA − AD) of the orbit t ↦ (Q e^{tA}, e^{−tA} D e^{tA}) for skew A."""
    A = skew(_matrix(A, "A"))
    if A.shape != (P.k, P.k):
        raise DimensionMismatchError(f"A must be {P.k}×{P.k}, got {A.shape}")
    D = P.D.entries
    return P.Q @ A, SymMatrix(D @ A - A @ D)
