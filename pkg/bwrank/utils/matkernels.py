"""
Dense symmetric linear-algebra kernels.

Sylvester solves, symmetric eigendecomposition with a fixed sign convention,
PSD square roots, thin SVD and orthogonal-group sampling. Every function is
pure and deterministic for a given input (and seed).
"""

from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np
import scipy.linalg as la
from numpy.typing import ArrayLike, NDArray

from bwrank.utils.errors import (
    DimensionMismatchError,
    NonFiniteError,
    NotPositiveDefiniteError,
    NotPositiveSemidefiniteError,
)

EPS = np.finfo(np.float64).eps
PSD_CLAMP_TOL = 1e-10


def _as_square(entries: ArrayLike, name: str) -> NDArray[np.float64]:
    arr = np.array(entries, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionMismatchError(f"{name} must be square, got shape {arr.shape}",
                                     {"shape": list(arr.shape)})
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError(f"{name} has non-finite entries")
    return arr


@dataclass(frozen=True, eq=False)
class SymMatrix:
    """Symmetric k×k matrix; symmetrized on construction."""
    entries: NDArray[np.float64]

    def __post_init__(self):
        arr = _as_square(self.entries, "SymMatrix")
        arr = 0.5 * (arr + arr.T)
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)


@dataclass(frozen=True, eq=False)
class SpdMatrix(SymMatrix):
    """Symmetric positive definite matrix; rejects eigenvalues below dim·eps·λ_max."""

    def __post_init__(self):
        super().__post_init__()
        values = la.eigvalsh(self.entries) if self.dim else np.zeros(0)
        if self.dim:
            lam_max = max(float(values[-1]), 0.0)
            threshold = self.dim * EPS * lam_max
            if values[0] <= threshold:
                raise NotPositiveDefiniteError(
                    f"matrix is not positive definite: smallest eigenvalue {values[0]:.3e}",
                    eigenvalue=float(values[0]), threshold=float(threshold))

    @property
    def inverse(self) -> NDArray[np.float64]:
        pair = sym_eig(self)
        return (pair.vectors / pair.values) @ pair.vectors.T


@dataclass(frozen=True, eq=False)
class EigenPair:
    values: NDArray[np.float64]
    vectors: NDArray[np.float64]


MatrixLike = Union[SymMatrix, ArrayLike]


def as_sym(A: MatrixLike) -> SymMatrix:
    return A if isinstance(A, SymMatrix) else SymMatrix(A)


def as_spd(A: MatrixLike) -> SpdMatrix:
    return A if isinstance(A, SpdMatrix) else SpdMatrix(np.asarray(A))


def fix_column_signs(vectors: NDArray[np.float64]) -> Tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Flip columns so that each column's largest-magnitude entry is positive.

    Ties go to the lowest row index (np.argmax). Returns the flipped matrix
    and the ±1 sign vector that was applied.
    """
    if vectors.size == 0:
        return vectors.copy(), np.ones(vectors.shape[1] if vectors.ndim == 2 else 0)
    pivots = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[pivots, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs, signs


def sym_eig(A: MatrixLike) -> EigenPair:
    """Ascending eigendecomposition A = VΛVᵀ with the largest-entry sign convention."""
    S = as_sym(A)
    values, vectors = la.eigh(S.entries)
    vectors, _ = fix_column_signs(vectors)
    return EigenPair(values=values, vectors=vectors)


def sylvester_solve(D: MatrixLike, T: MatrixLike) -> SymMatrix:
    """Unique symmetric S with DS + SD = T, for SPD D.

    Solved in the eigenbasis of D: S̃_ij = T̃_ij / (λ_i + λ_j).
    """
    Dm = as_spd(D)
    Tm = as_sym(T)
    if Dm.dim != Tm.dim:
        raise DimensionMismatchError(
            f"sylvester_solve: D is {Dm.dim}×{Dm.dim} but T is {Tm.dim}×{Tm.dim}",
            {"d_dim": Dm.dim, "t_dim": Tm.dim})
    pair = sym_eig(Dm)
    V = pair.vectors
    T_tilde = V.T @ Tm.entries @ V
    S_tilde = T_tilde / (pair.values[:, None] + pair.values[None, :])
    return SymMatrix(V @ S_tilde @ V.T)


def psd_sqrt(A: MatrixLike, clamp_tol: float = PSD_CLAMP_TOL, zero_tol: float = 0.0) -> SymMatrix:
    """Principal square root of a PSD matrix; roundoff negatives are clamped to 0.

    Eigenvalues at or below zero_tol·λ_max are also treated as exact zeros, which
    keeps the root's nullspace exact for rank-deficient inputs.
    """
    pair = sym_eig(A)
    values = pair.values
    if values.size == 0:
        return SymMatrix(np.zeros((0, 0)))
    lam_max = max(float(np.max(np.abs(values))), 0.0)
    threshold = -clamp_tol * lam_max
    if values[0] < threshold:
        raise NotPositiveSemidefiniteError(
            f"psd_sqrt: eigenvalue {values[0]:.3e} below clamp threshold {threshold:.3e}",
            eigenvalue=float(values[0]), threshold=float(threshold))
    values = np.where(values <= zero_tol * lam_max, 0.0, values)
    roots = np.sqrt(np.clip(values, 0.0, None))
    return SymMatrix((pair.vectors * roots) @ pair.vectors.T)


def thin_svd(A: ArrayLike) -> Tuple[NDArray[np.float64], NDArray[np.float64], NDArray[np.float64]]:
    """A = U diag(sigma) Vᵀ with U n×k, sigma descending, V k×k; U's columns sign-fixed."""
    arr = np.array(A, dtype=np.float64)
    if arr.ndim != 2:
        raise DimensionMismatchError(f"thin_svd expects a matrix, got ndim={arr.ndim}")
    n, k = arr.shape
    if n < k:
        raise DimensionMismatchError(f"thin_svd expects n >= k, got {n}×{k}",
                                     {"n": n, "k": k})
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError("thin_svd: non-finite input")
    if k == 0:
        return np.zeros((n, 0)), np.zeros(0), np.zeros((0, 0))
    U, sigma, Vh = la.svd(arr, full_matrices=False)
    U, signs = fix_column_signs(U)
    V = Vh.T * signs
    return U, sigma, V


def random_orthogonal(r: int, seed: int, det_sign: int = 1) -> NDArray[np.float64]:
    """Haar-distributed element of O(r) with the requested determinant sign.

    r = 0 returns the empty matrix, the unique element of O(0).
    """
    if r < 0:
        raise DimensionMismatchError(f"random_orthogonal: r must be >= 0, got {r}")
    if det_sign not in (1, -1):
        raise ValueError(f"det_sign must be +1 or -1, got {det_sign}")
    if r == 0:
        return np.zeros((0, 0))
    rng = np.random.default_rng(seed)
    Z = rng.standard_normal((r, r))
    Q, R = la.qr(Z)
    Q = Q * np.sign(np.where(np.diag(R) == 0, 1.0, np.diag(R)))
    if np.sign(la.det(Q)) != det_sign:
        Q[:, 0] = -Q[:, 0]
    return Q


def symmetrize(A: ArrayLike) -> NDArray[np.float64]:
    arr = np.asarray(A, dtype=np.float64)
    return 0.5 * (arr + arr.T)


def skew(A: ArrayLike) -> NDArray[np.float64]:
    arr = np.asarray(A, dtype=np.float64)
    return 0.5 * (arr - arr.T)


def orthonormality_residual(Q: ArrayLike) -> float:
    """‖QᵀQ − I‖_F."""
    arr = np.asarray(Q, dtype=np.float64)
    return float(np.linalg.norm(arr.T @ arr - np.eye(arr.shape[1])))


def polar_orthogonal(M: ArrayLike) -> NDArray[np.float64]:
    """Orthogonal polar factor of a square matrix (nearest orthogonal matrix)."""
    U, _ = la.polar(np.asarray(M, dtype=np.float64))
    return U
