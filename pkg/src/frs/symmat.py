"""Dense symmetric-matrix kernel.

Every function accepts a single ``(d, d)`` array or a stack ``(..., d, d)``
and operates on the trailing two axes.
"""
from enum import Enum
from typing import Callable, NamedTuple

import numpy as np

from .exceptions import DimensionError, EigenSolverError, SingularMatrixError

#: Default eigenvalue floor, relative to the largest eigenvalue.
EIG_FLOOR = 1e-10


class PSDClass(str, Enum):
    POSITIVE_DEFINITE = "positive_definite"
    SEMI_DEFINITE = "semi_definite"
    INDEFINITE = "indefinite"


class SpectralDecomp(NamedTuple):
    """Eigenvalues in nondecreasing order and orthonormal eigenvectors (columns)."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self):
        return _compose(self.eigenvectors, self.eigenvalues)


def _as_square(M):
    M = np.asarray(M, dtype=float)
    if M.ndim < 2 or M.shape[-1] != M.shape[-2]:
        raise DimensionError(f"expected square matrices, got shape {M.shape}")
    if M.shape[-1] < 1:
        raise DimensionError("matrix dimension must be at least 1")
    return M


def _compose(Q, lam):
    return (Q * lam[..., None, :]) @ np.swapaxes(Q, -1, -2)


def sym(M):
    """Symmetric part ``(M + M^T) / 2`` of a square matrix (or stack)."""
    M = _as_square(M)
    return 0.5 * (M + np.swapaxes(M, -1, -2))


def eig(S):
    """Eigendecomposition of a symmetric matrix.

    Parameters
    ----------
    S : ndarray, shape (..., d, d)
        Symmetric matrices. Only the symmetric part is used.

    Returns
    -------
    SpectralDecomp
        ``eigenvalues`` with shape (..., d) in nondecreasing order and
        ``eigenvectors`` with shape (..., d, d).
    """
    S = sym(S)
    if not np.all(np.isfinite(S)):
        raise EigenSolverError("eigendecomposition of a matrix with non-finite entries")
    try:
        lam, Q = np.linalg.eigh(S)
    except np.linalg.LinAlgError as exc:
        raise EigenSolverError(f"symmetric eigensolver did not converge: {exc}") from exc
    return SpectralDecomp(lam, Q)


def _thresholds(lam, floor):
    top = np.max(lam, axis=-1, keepdims=True)
    return floor * np.where(top > 0, top, 1.0)


def spectral_fn(S, f: Callable, floor: float = 0.0, policy: str = "clamp"):
    """Apply a scalar function to the spectrum of a symmetric matrix.

    Parameters
    ----------
    S : ndarray, shape (..., d, d)
    f : callable
        Vectorized scalar function applied to the eigenvalues.
    floor : float
        Lower bound on eigenvalues, relative to the largest eigenvalue of
        each matrix. ``0`` only removes negative round-off.
    policy : {"clamp", "strict"}
        ``"clamp"`` raises eigenvalues below the floor up to it;
        ``"strict"`` raises :class:`SingularMatrixError` instead.

    Returns
    -------
    ndarray, shape (..., d, d)
        ``Q diag(f(lambda)) Q^T``.
    """
    if policy not in ("clamp", "strict"):
        raise ValueError(f"unknown eigenvalue policy {policy!r}")
    lam, Q = eig(S)
    lo = _thresholds(lam, floor)
    low = lam < lo
    if np.any(low):
        if policy == "strict":
            bad = float(lam[low].min())
            raise SingularMatrixError(
                f"eigenvalue {bad:.3e} below floor {float(lo.max()):.3e}", eigenvalue=bad
            )
        lam = np.maximum(lam, lo)
    return _compose(Q, f(lam))


def sqrtm(S, policy="clamp"):
    return spectral_fn(S, np.sqrt, floor=0.0, policy=policy)


def logm(S, floor=EIG_FLOOR, policy="clamp"):
    return spectral_fn(S, np.log, floor=floor, policy=policy)


def invm(S, floor=EIG_FLOOR, policy="clamp"):
    return spectral_fn(S, np.reciprocal, floor=floor, policy=policy)


def expm(S):
    lam, Q = eig(S)
    return _compose(Q, np.exp(lam))


def frobenius(M, N):
    """Frobenius product ``tr(M N^T)``; reduces over the trailing two axes."""
    M = np.asarray(M, dtype=float)
    N = np.asarray(N, dtype=float)
    if M.shape != N.shape:
        raise DimensionError(f"shape mismatch {M.shape} vs {N.shape}")
    return np.sum(M * N, axis=(-2, -1))


def trace(M):
    return np.trace(np.asarray(M), axis1=-2, axis2=-1)


def min_eigenvalue(S):
    return np.linalg.eigvalsh(sym(S))[..., 0]


def classify_psd(S, tol=1e-12):
    """Classify a single symmetric matrix by the sign of its smallest eigenvalue."""
    lmin = float(min_eigenvalue(S))
    if lmin > tol:
        return PSDClass.POSITIVE_DEFINITE
    if lmin >= -tol:
        return PSDClass.SEMI_DEFINITE
    return PSDClass.INDEFINITE


def lyapunov_solve(A, S, floor=EIG_FLOOR):
    """Solve ``A U + U A = 2 S`` for symmetric ``U``.

    This inverts the map ``U -> (AU)^sym``. In the eigenbasis of ``A`` the
    solution is ``U_ij = 2 S_ij / (lambda_i + lambda_j)``.

    Parameters
    ----------
    A : ndarray, shape (..., d, d)
        Positive definite matrices.
    S : ndarray, shape (..., d, d)
        Symmetric right-hand sides.
    floor : float
        Smallest admissible eigenvalue of ``A`` relative to its largest one.

    Raises
    ------
    SingularMatrixError
        If ``A`` is not positive definite at the given floor.
    """
    A = sym(A)
    S = sym(S)
    if A.shape[-1] != S.shape[-1]:
        raise DimensionError(f"shape mismatch {A.shape} vs {S.shape}")
    lam, Q = eig(A)
    lo = _thresholds(lam, floor)
    if np.any(lam[..., 0] <= 0) or np.any(lam < lo):
        bad = float(lam[..., 0].min())
        raise SingularMatrixError(
            f"Lyapunov operator singular: eigenvalue {bad:.3e}", eigenvalue=bad
        )
    Qt = np.swapaxes(Q, -1, -2)
    S_hat = Qt @ S @ Q
    U_hat = 2.0 * S_hat / (lam[..., :, None] + lam[..., None, :])
    return sym(Q @ U_hat @ Qt)
