"""Matrix-valued measures on a discretized domain and their functionals.

A measure is stored as one PSD block per grid cell, ``values[k]`` of shape
``(d, d)``. Integrals over the domain are quadrature sums against the cell
weights, which are normalized to total ``1/d`` so that the identity field
has unit trace mass.
"""
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .exceptions import DimensionError, DomainError
from .symmat import EIG_FLOOR, frobenius, invm, logm, min_eigenvalue, sym, trace

MASS_TOL = 1e-9
PSD_TOL = 1e-12


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Grid:
    """Quadrature cells of the domain.

    Use :meth:`from_weights` or :meth:`uniform`; both rescale the weights so
    that they sum to ``1 / matrix_dim``. The pre-normalization total is kept
    in ``original_volume``.
    """

    weights: np.ndarray
    matrix_dim: int
    original_volume: float = 1.0
    coords: Optional[np.ndarray] = None
    cell_ids: tuple = ()

    def __post_init__(self):
        w = _frozen(self.weights)
        if w.ndim != 1 or w.size == 0:
            raise DimensionError("grid weights must be a non-empty 1-D sequence")
        if np.any(~np.isfinite(w)) or np.any(w <= 0):
            raise DomainError("grid weights must be finite and positive")
        d = int(self.matrix_dim)
        if d < 1:
            raise DimensionError("matrix_dim must be >= 1")
        if abs(w.sum() - 1.0 / d) > 1e-12:
            raise DomainError(f"weights sum to {w.sum()!r}, expected 1/d = {1.0 / d!r}")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "matrix_dim", d)
        if self.coords is not None:
            c = _frozen(self.coords)
            if c.shape[0] != w.size:
                raise DimensionError("one coordinate row per cell expected")
            object.__setattr__(self, "coords", c)
        ids = tuple(self.cell_ids) if self.cell_ids else tuple(range(w.size))
        if len(ids) != w.size:
            raise DimensionError("one id per cell expected")
        object.__setattr__(self, "cell_ids", ids)

    @classmethod
    def from_weights(cls, weights: Sequence[float], matrix_dim: int, coords=None, cell_ids=()):
        w = np.asarray(weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise DimensionError("grid weights must be a non-empty 1-D sequence")
        if np.any(~np.isfinite(w)) or np.any(w <= 0):
            raise DomainError("grid weights must be finite and positive")
        total = float(w.sum())
        return cls(w / (total * matrix_dim), matrix_dim, total, coords, cell_ids)

    @classmethod
    def uniform(cls, n_cells: int, matrix_dim: int):
        return cls.from_weights(np.ones(n_cells), matrix_dim)

    @property
    def n_cells(self):
        return self.weights.size

    @property
    def shape(self):
        """Shape of a field of blocks on this grid."""
        return (self.n_cells, self.matrix_dim, self.matrix_dim)

    def integrate(self, per_cell):
        """Quadrature sum of a per-cell quantity along the leading cell axis."""
        return np.tensordot(np.asarray(per_cell, dtype=float), self.weights, axes=([-1], [0]))

    def __eq__(self, other):
        if not isinstance(other, Grid):
            return NotImplemented
        return (
            self.matrix_dim == other.matrix_dim
            and np.array_equal(self.weights, other.weights)
            and self.cell_ids == other.cell_ids
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class MatrixMeasure:
    """PSD block field on a grid.

    With ``unit_mass=True`` (the default) the total trace mass is one, i.e.
    the measure is a point of the Fisher-Rao space. ``unit_mass=False``
    marks an unconstrained PSD field (Hellinger mode).
    """

    grid: Grid
    values: np.ndarray
    unit_mass: bool = True

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.shape:
            raise DimensionError(f"values shape {v.shape} does not match grid {self.grid.shape}")
        object.__setattr__(self, "values", _frozen(sym(v)))

    @property
    def mass(self):
        return mass(self.grid, self.values)

    def __len__(self):
        return self.grid.n_cells


@dataclass(frozen=True, eq=False)
class TangentField:
    """Matrix potentials ``U_k`` at a base measure; the tangent vector is ``(A U)^sym``."""

    base: MatrixMeasure
    potentials: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.potentials, dtype=float)
        if u.shape != self.base.grid.shape:
            raise DimensionError("potential field does not match the base grid")
        object.__setattr__(self, "potentials", _frozen(sym(u)))

    @property
    def average(self):
        """``sum_k w_k <A_k, U_k>``; zero for admissible tangent fields."""
        return float(self.base.grid.integrate(frobenius(self.base.values, self.potentials)))

    def vector(self):
        """The tangent vector field ``(A U)^sym``."""
        return sym(self.base.values @ self.potentials)


@dataclass(frozen=True)
class FunctionalValue:
    """Value of a functional, with its Fisher-Rao gradient when requested.

    ``gradient`` is the tangent vector field (blocks ``(d, d)`` per cell) and
    ``potential`` the matching zero-average potential.
    """

    value: float
    gradient: Optional[np.ndarray] = None
    potential: Optional[TangentField] = None
    infinite: bool = False


def mass(grid, values):
    return float(grid.integrate(trace(values)))


def make_measure(grid: Grid, raw, normalize: bool = False, unit_mass: bool = True):
    """Build a measure from raw blocks, checking positivity and mass.

    Parameters
    ----------
    grid : Grid
    raw : array_like, shape (K, d, d)
    normalize : bool
        Divide by the total mass instead of requiring it to be one.
    unit_mass : bool
        If False, only positivity is checked and no mass is enforced.

    Raises
    ------
    DomainError
        On an indefinite block (the message names the cell) or zero mass.
    """
    raw = sym(np.asarray(raw, dtype=float))
    if raw.shape != grid.shape:
        raise DimensionError(f"raw blocks of shape {raw.shape}, grid expects {grid.shape}")
    lmin = min_eigenvalue(raw)
    scale = np.maximum(1.0, np.abs(raw).max(axis=(-2, -1)))
    bad = np.flatnonzero(lmin < -PSD_TOL * scale)
    if bad.size:
        k = int(bad[0])
        raise DomainError(
            f"block at cell {grid.cell_ids[k]!r} is indefinite (min eigenvalue {lmin[k]:.3e})"
        )
    if not unit_mass:
        return MatrixMeasure(grid, raw, unit_mass=False)
    m = mass(grid, raw)
    if normalize:
        if not m > 0:
            raise DomainError("cannot normalize a measure with zero mass")
        raw = raw / m
    elif abs(m - 1.0) > MASS_TOL:
        raise DomainError(f"measure has mass {m!r}, expected 1")
    return MatrixMeasure(grid, raw)


def uniform_identity(grid: Grid):
    """The identity field, the minimizer of the entropy."""
    d = grid.matrix_dim
    return MatrixMeasure(grid, np.broadcast_to(np.eye(d), grid.shape))


def _singular(values, floor):
    lam = np.linalg.eigvalsh(values)
    top = np.maximum(lam[..., -1], 0.0)
    return bool(np.any(lam[..., 0] <= floor * np.where(top > 0, top, 1.0)))


def grad_fr(A: MatrixMeasure, fprime):
    """Fisher-Rao gradient of an internal-energy functional.

    Given the Euclidean first variation ``F'(A_k)`` on every cell, returns
    ``G_k = (A_k F'_k)^sym - c A_k`` with ``c = sum_j w_j tr(A_j F'_j)``.
    The result is mass preserving: ``sum_k w_k tr G_k = 0``.
    """
    F = sym(np.asarray(fprime, dtype=float))
    AF = A.values @ F
    c = float(A.grid.integrate(trace(AF)))
    return sym(AF) - c * A.values


def project_tangent(A: MatrixMeasure, U_raw):
    """Shift a potential field by a multiple of the identity so it has zero average."""
    U = sym(np.asarray(U_raw, dtype=float))
    c = float(A.grid.integrate(frobenius(A.values, U)))
    return TangentField(A, U - c * np.eye(A.grid.matrix_dim))


def fr_norm_sq(A: MatrixMeasure, U: TangentField):
    """Squared Fisher-Rao norm ``sum_k w_k <A_k U_k, U_k>`` of a tangent field."""
    if U.base is not A and not (
        U.base.grid == A.grid and np.array_equal(U.base.values, A.values)
    ):
        raise DomainError("tangent field is based at a different measure")
    P = U.potentials
    return float(A.grid.integrate(frobenius(A.values @ P, P)))


def _with_gradient(A, value, fprime):
    potential = project_tangent(A, fprime)
    return FunctionalValue(value, gradient=potential.vector(), potential=potential)


def entropy(A: MatrixMeasure, gradient: bool = False, floor: float = EIG_FLOOR):
    """Entropy relative to the identity, ``sum_k w_k tr[A_k - log A_k - Id] / 2``.

    Blocks with an eigenvalue at or below ``floor`` (relative to the block's
    largest eigenvalue) give a value flagged as ``+inf``.
    """
    V = A.values
    if _singular(V, floor):
        return FunctionalValue(np.inf, infinite=True)
    d = A.grid.matrix_dim
    lam = np.linalg.eigvalsh(V)
    per_cell = 0.5 * np.sum(lam - np.log(lam) - 1.0, axis=-1)
    value = float(A.grid.integrate(per_cell))
    if not gradient:
        return FunctionalValue(value)
    fprime = 0.5 * (np.eye(d) - invm(V, floor=floor))
    return _with_gradient(A, value, fprime)


def fisher_info(A: MatrixMeasure, gradient: bool = False, floor: float = EIG_FLOOR):
    """Fisher information ``(sum_k w_k tr A_k^{-1} - 1) / 4``, ``+inf`` on singular blocks."""
    V = A.values
    if _singular(V, floor):
        return FunctionalValue(np.inf, infinite=True)
    inv = invm(V, floor=floor)
    value = 0.25 * (float(A.grid.integrate(trace(inv))) - 1.0)
    if not gradient:
        return FunctionalValue(value)
    return _with_gradient(A, value, -0.25 * inv @ inv)


def von_neumann(A: MatrixMeasure, gradient: bool = False, floor: float = EIG_FLOOR):
    """Negative von Neumann entropy ``sum_k w_k tr(A_k log A_k)`` with ``0 log 0 = 0``."""
    lam = np.clip(np.linalg.eigvalsh(A.values), 0.0, None)
    with np.errstate(divide="ignore", invalid="ignore"):
        xlogx = np.where(lam > 0, lam * np.log(np.where(lam > 0, lam, 1.0)), 0.0)
    value = float(A.grid.integrate(np.sum(xlogx, axis=-1)))
    if not gradient:
        return FunctionalValue(value)
    fprime = logm(A.values, floor=floor) + np.eye(A.grid.matrix_dim)
    return _with_gradient(A, value, fprime)
