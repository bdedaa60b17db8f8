"""Bures distance, Gaussian Wasserstein distance and the Bures-Wasserstein metric."""
from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionError, DomainError
from .symmat import PSDClass, classify_psd, frobenius, min_eigenvalue, sqrtm, sym, trace

PSD_TOL = 1e-12


def _check_psd(A, name):
    A = sym(A)
    lam = np.linalg.eigvalsh(A)
    scale = max(1.0, float(np.abs(lam).max()))
    if lam[..., 0].min() < -PSD_TOL * scale:
        raise DomainError(f"{name} is not positive semi-definite (min eigenvalue {lam.min():.3e})")
    return A


def _check_pd(A, name):
    A = sym(A)
    if np.any(min_eigenvalue(A) <= 0):
        raise DomainError(f"{name} is not positive definite")
    return A


@dataclass(frozen=True, eq=False)
class GaussianParams:
    """Mean vector and PSD covariance of a Gaussian measure."""

    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        m = np.atleast_1d(np.asarray(self.mean, dtype=float))
        A = sym(self.covariance)
        if m.ndim != 1 or A.shape != (m.size, m.size):
            raise DimensionError(f"mean of shape {m.shape} and covariance {A.shape} disagree")
        if classify_psd(A, PSD_TOL) is PSDClass.INDEFINITE:
            raise DomainError("covariance is indefinite")
        object.__setattr__(self, "mean", m)
        object.__setattr__(self, "covariance", A)

    @property
    def dim(self):
        return self.mean.size


def bures_sq(A0, A1):
    r"""Squared Bures distance between PSD matrices.

    .. math::
        \mathfrak{B}^2(A_0, A_1) = \operatorname{tr} A_0 + \operatorname{tr} A_1
        - 2 \operatorname{tr}\big((A_0^{1/2} A_1 A_0^{1/2})^{1/2}\big)

    Semi-definite arguments are allowed; negative round-off eigenvalues in
    the inner square roots are clamped at zero.

    Parameters
    ----------
    A0, A1 : ndarray, shape (..., d, d)

    Returns
    -------
    float or ndarray, shape (...,)
    """
    A0 = _check_psd(A0, "A0")
    A1 = _check_psd(A1, "A1")
    if A0.shape != A1.shape:
        raise DimensionError(f"shape mismatch {A0.shape} vs {A1.shape}")
    r0 = sqrtm(A0)
    cross = trace(sqrtm(r0 @ A1 @ r0))
    d2 = trace(A0) + trace(A1) - 2.0 * cross
    d2 = np.maximum(d2, 0.0)
    return float(d2) if np.ndim(d2) == 0 else d2


def gaussian_w2_sq(g0: GaussianParams, g1: GaussianParams):
    """Squared 2-Wasserstein distance between two Gaussians."""
    if g0.dim != g1.dim:
        raise DimensionError(f"dimension mismatch {g0.dim} vs {g1.dim}")
    dm = g1.mean - g0.mean
    return float(dm @ dm) + bures_sq(g0.covariance, g1.covariance)


def metric(A, U, V):
    """Bures-Wasserstein metric ``g_A(U, V) = tr(U A V)`` at a PD point."""
    A = _check_pd(A, "A")
    U = sym(U)
    V = sym(V)
    return float(frobenius(A @ U, V)) if A.ndim == 2 else frobenius(A @ U, V)


def riesz(A, U):
    """Tangent vector ``(A U)^sym`` associated with the potential ``U``."""
    return sym(np.asarray(A, dtype=float) @ sym(U))


def bures_dynamic_sq(A0, A1, n_steps=32, cfg=None):
    """Minimal discrete kinetic action between two PD matrices.

    Solves the dynamical problem ``min int <A U, U> dt`` subject to
    ``dA/dt = (A U)^sym`` on a single cell without a mass constraint. The
    optimum approximates ``4 * bures_sq(A0, A1)``.

    Raises
    ------
    ConvergenceError
        If the optimizer stops before reaching ``cfg.grad_tol``.
    """
    from .action import SolverConfig, solve_geodesic
    from .exceptions import ConvergenceError
    from .measures import Grid, make_measure

    A0 = _check_pd(A0, "A0")
    A1 = _check_pd(A1, "A1")
    if A0.shape != A1.shape or A0.ndim != 2:
        raise DimensionError("expected two d x d matrices of equal size")
    cfg = cfg if cfg is not None else SolverConfig(n_steps=n_steps)
    if cfg.n_steps != n_steps:
        cfg = cfg.replace(n_steps=n_steps)
    grid = Grid.uniform(1, A0.shape[0])
    m0 = make_measure(grid, A0[None], unit_mass=False)
    m1 = make_measure(grid, A1[None], unit_mass=False)
    report = solve_geodesic(m0, m1, cfg, mass_constraint=False)
    if not report.converged:
        raise ConvergenceError(
            f"dynamic Bures solve stopped after {report.iterations} iterations "
            f"with gradient norm {report.final_grad_norm:.3e}",
            grad_norm=report.final_grad_norm,
            iterations=report.iterations,
        )
    # the single cell carries weight 1/d; undo it to get the pointwise action
    return report.value / float(grid.weights[0])
