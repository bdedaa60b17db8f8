"""Discrete paths of matrix measures and the variational solvers on them.

A path has ``n + 1`` knots at times ``t_j = j / n``. On each interval the
velocity potential is recovered from the Lyapunov equation

    Abar U + U Abar = 2 S,   Abar = (A_j + A_{j+1}) / 2,   S = (A_{j+1} - A_j) / dt,

so that the kinetic action is a function of the knots only:

    action = sum_j dt sum_k w_k <Abar_jk U_jk, U_jk>.

With the relations ``d<U, S>/dAbar = -U^2`` and ``d<U, S>/dS = 2U`` the
gradient is available in closed form. Interior knots are optimized with a
limited-memory quasi-Newton method whose initial inverse Hessian is the
Fisher-Rao metric at the current iterate; every trial point is retracted
onto the feasible set (eigenvalue clamp, then mass renormalization).
"""
import dataclasses
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .exceptions import DomainError, FRSError
from .measures import Grid, MatrixMeasure, entropy
from .symmat import sym, trace

logger = logging.getLogger(__name__)

ARMIJO = 0.25
SHRINK = 0.5
MAX_HALVINGS = 60


@dataclass(frozen=True, eq=False)
class Path:
    """Knots ``A_0 .. A_n`` on a uniform time grid of ``[0, 1]``.

    ``knots`` has shape ``(n + 1, K, d, d)``. ``unit_mass=False`` flags an
    unconstrained (Hellinger) path where only positivity is required.
    """

    grid: Grid
    knots: np.ndarray
    unit_mass: bool = True

    def __post_init__(self):
        k = np.array(sym(np.asarray(self.knots, dtype=float)))
        if k.ndim != 4 or k.shape[1:] != self.grid.shape:
            raise DomainError(f"knots of shape {k.shape} do not match grid {self.grid.shape}")
        if k.shape[0] < 3:
            raise DomainError("a path needs at least two time steps")
        k.setflags(write=False)
        object.__setattr__(self, "knots", k)

    @property
    def n_steps(self):
        return self.knots.shape[0] - 1

    @property
    def times(self):
        return np.linspace(0.0, 1.0, self.n_steps + 1)

    def measure(self, j) -> MatrixMeasure:
        return MatrixMeasure(self.grid, self.knots[j], unit_mass=self.unit_mass)

    @property
    def measures(self) -> List[MatrixMeasure]:
        return [self.measure(j) for j in range(self.n_steps + 1)]

    def masses(self):
        return self.grid.integrate(trace(self.knots))

    def reversed(self):
        return Path(self.grid, self.knots[::-1], self.unit_mass)


@dataclass(frozen=True)
class SolverConfig:
    """Discretization and optimizer settings.

    ``epsilon`` is the Schrodinger temperature; ``eig_floor`` is the
    absolute lower bound imposed on every eigenvalue of every knot.
    ``seed`` is carried for provenance; the solvers themselves are
    deterministic.
    """

    n_steps: int = 32
    max_iter: int = 5000
    grad_tol: float = 1e-5
    eig_floor: float = 1e-10
    step_init: float = 1.0
    epsilon: float = 0.0
    seed: int = 0
    memory: int = 30

    def __post_init__(self):
        if int(self.n_steps) < 2:
            raise DomainError("n_steps must be at least 2")
        if not self.grad_tol > 0:
            raise DomainError("grad_tol must be positive")
        if self.epsilon < 0:
            raise DomainError("epsilon must be nonnegative")
        if self.eig_floor < 0:
            raise DomainError("eig_floor must be nonnegative")

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


@dataclass
class SolveReport:
    value: float
    action_part: float
    fisher_part: float
    iterations: int
    final_grad_norm: float
    path: Path
    epsilon: float = 0.0
    converged: bool = True
    diagnostics: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# objective pieces


def _interval_terms(knots, weights, grad=False):
    """Per-interval kinetic costs and, optionally, the knot gradient.

    The gradient is returned in potential form: entry ``[j, k]`` is the
    partial derivative with respect to ``A_jk`` divided by ``w_k``, so a
    directional derivative is ``sum_jk w_k <G_jk, dA_jk>``.
    """
    n = knots.shape[0] - 1
    dt = 1.0 / n
    Abar = 0.5 * (knots[1:] + knots[:-1])
    S = (knots[1:] - knots[:-1]) / dt
    lam, Q = np.linalg.eigh(Abar)
    if not np.all(lam[..., 0] > 0):
        return (np.full(n, np.inf), None) if grad else np.full(n, np.inf)
    Qt = np.swapaxes(Q, -1, -2)
    S_hat = Qt @ S @ Q
    U_hat = 2.0 * S_hat / (lam[..., :, None] + lam[..., None, :])
    per_cell = np.sum(U_hat * S_hat, axis=(-2, -1))
    costs = dt * (per_cell @ weights)
    if not grad:
        return costs
    U = Q @ U_hat @ Qt
    gA = -0.5 * dt * (U @ U)
    gS = 2.0 * U
    G = np.zeros_like(knots)
    G[:-1] += gA - gS
    G[1:] += gA + gS
    return costs, sym(G)


def interval_actions(path: Path):
    """Kinetic action of each time interval of the path."""
    return _interval_terms(path.knots, path.grid.weights)


def path_action(path: Path) -> float:
    """Discrete kinetic action; ``+inf`` if a midpoint block is singular."""
    return float(np.sum(interval_actions(path)))


def path_action_gradient(path: Path):
    """Action and its knot gradient (potential form, shape of ``path.knots``)."""
    costs, G = _interval_terms(path.knots, path.grid.weights, grad=True)
    return float(np.sum(costs)), G


def _trapezoid(n):
    tau = np.full(n + 1, 1.0 / n)
    tau[[0, -1]] *= 0.5
    return tau


def _fisher_terms(knots, weights, grad=False):
    lam, Q = np.linalg.eigh(knots)
    if not np.all(lam[..., 0] > 0):
        return (np.inf, None) if grad else np.inf
    tau = _trapezoid(knots.shape[0] - 1)
    per_knot = 0.25 * (np.sum(1.0 / lam, axis=-1) @ weights - 1.0)
    value = float(tau @ per_knot)
    if not grad:
        return value
    inv2 = (Q * lam[..., None, :] ** -2) @ np.swapaxes(Q, -1, -2)
    G = -0.25 * tau[:, None, None, None] * inv2
    return value, sym(G)


def path_fisher(path: Path) -> float:
    """Trapezoidal time integral of the Fisher information along the path."""
    return float(_fisher_terms(path.knots, path.grid.weights))


def path_fisher_gradient(path: Path):
    return _fisher_terms(path.knots, path.grid.weights, grad=True)


# ---------------------------------------------------------------------------
# feasibility


def linear_path(A0: MatrixMeasure, A1: MatrixMeasure, n_steps: int, eig_floor=0.0) -> Path:
    """Linear interpolation of the endpoints, retracted onto the feasible set."""
    t = np.linspace(0.0, 1.0, n_steps + 1)[:, None, None, None]
    knots = (1.0 - t) * A0.values + t * A1.values
    unit = A0.unit_mass and A1.unit_mass
    knots[1:-1] = _retract(knots[1:-1], A0.grid.weights, eig_floor, unit)
    knots[0], knots[-1] = A0.values, A1.values
    return Path(A0.grid, knots, unit)


def _retract(X, weights, eig_floor, unit_mass):
    lam, Q = np.linalg.eigh(X)
    if np.any(lam < eig_floor):
        lam = np.maximum(lam, eig_floor)
        X = (Q * lam[..., None, :]) @ np.swapaxes(Q, -1, -2)
    X = sym(X)
    if unit_mass:
        m = trace(X) @ weights
        X = X / m[:, None, None, None]
    return X


class _Problem:
    """Objective on the interior knots, with endpoints held fixed."""

    def __init__(self, A0, A1, epsilon, unit_mass):
        self.grid = A0.grid
        self.w = A0.grid.weights
        self.A0 = np.asarray(A0.values)
        self.A1 = np.asarray(A1.values)
        self.eps2 = float(epsilon) ** 2
        self.unit_mass = unit_mass
        self.max_zero_average = 0.0

    def full(self, X):
        return np.concatenate([self.A0[None], X, self.A1[None]])

    def parts(self, X):
        knots = self.full(X)
        act = float(np.sum(_interval_terms(knots, self.w)))
        fis = _fisher_terms(knots, self.w) if self.eps2 > 0 else 0.0
        return act, fis

    def value(self, X):
        act, fis = self.parts(X)
        return act + self.eps2 * fis if self.eps2 > 0 else act

    def value_grad(self, X):
        knots = self.full(X)
        costs, G = _interval_terms(knots, self.w, grad=True)
        f = float(np.sum(costs))
        if G is None:
            return np.inf, None
        if self.eps2 > 0:
            fis, Gf = _fisher_terms(knots, self.w, grad=True)
            if Gf is None:
                return np.inf, None
            f += self.eps2 * fis
            G = G + self.eps2 * Gf
        return f, G[1:-1]

    def inner(self, a, b):
        return float(np.sum(np.sum(a * b, axis=(-2, -1)) @ self.w))

    def precondition(self, X, q):
        """Metric inverse at ``X``: potentials ``q`` mapped to tangent vectors.

        In constrained mode the potentials are first shifted to zero average,
        knot by knot, which makes the output mass preserving.
        """
        if self.unit_mass:
            c = np.sum(X * q, axis=(-2, -1)) @ self.w
            q = q - c[:, None, None, None] * np.eye(X.shape[-1])
            avg = np.abs(np.sum(X * q, axis=(-2, -1)) @ self.w)
            self.max_zero_average = max(self.max_zero_average, float(avg.max(initial=0.0)))
        return sym(X @ q)


def _minimize(problem: _Problem, X, cfg: SolverConfig):
    """Limited-memory quasi-Newton descent with Armijo backtracking and retraction."""
    n = cfg.n_steps
    dt = 1.0 / n
    w = problem.w
    f, g = problem.value_grad(X)
    if not np.isfinite(f):
        raise DomainError("initial path has a singular midpoint block")
    mem_s, mem_y, mem_rho = [], [], []
    gamma = cfg.step_init * dt / 4.0
    diag = {"max_mass_error": 0.0, "min_eigenvalue": np.inf, "line_search_failures": 0}

    def track(Y):
        if problem.unit_mass:
            err = np.abs(trace(Y) @ w - 1.0).max(initial=0.0)
            diag["max_mass_error"] = max(diag["max_mass_error"], float(err))
        lm = np.linalg.eigvalsh(Y)[..., 0].min(initial=np.inf)
        diag["min_eigenvalue"] = min(diag["min_eigenvalue"], float(lm))

    track(X)
    converged = False
    it = 0
    gnorm = np.inf
    for it in range(cfg.max_iter + 1):
        Hg = problem.precondition(X, g)
        gnorm = float(np.sqrt(max(problem.inner(g, Hg), 0.0) / dt))
        logger.debug("it %d f=%.17g |g|=%.3e", it, f, gnorm)
        if gnorm <= cfg.grad_tol:
            converged = True
            break
        if it == cfg.max_iter:
            break

        # two-loop recursion
        q = g.copy()
        alphas = []
        for s, y, rho in zip(reversed(mem_s), reversed(mem_y), reversed(mem_rho)):
            a = rho * problem.inner(s, q)
            alphas.append(a)
            q -= a * y
        r = gamma * problem.precondition(X, q)
        for (s, y, rho), a in zip(zip(mem_s, mem_y, mem_rho), reversed(alphas)):
            b = rho * problem.inner(y, r)
            r += (a - b) * s
        d = -r
        slope = problem.inner(g, d)
        if not slope < 0:
            mem_s.clear(), mem_y.clear(), mem_rho.clear()
            d = -gamma * Hg
            slope = problem.inner(g, d)

        t = 1.0
        accepted = False
        for _ in range(MAX_HALVINGS):
            X_new = _retract(X + t * d, w, cfg.eig_floor, problem.unit_mass)
            f_new = problem.value(X_new)
            if np.isfinite(f_new) and f_new <= f + ARMIJO * t * slope:
                accepted = True
                break
            t *= SHRINK
        if not accepted:
            diag["line_search_failures"] += 1
            if mem_s:
                mem_s.clear(), mem_y.clear(), mem_rho.clear()
                continue
            logger.debug("line search stalled at iteration %d, |g|=%.3e", it, gnorm)
            break

        f_new, g_new = problem.value_grad(X_new)
        s = X_new - X
        y = g_new - g
        sy = problem.inner(s, y)
        if sy > 1e-16 * np.sqrt(problem.inner(s, s) * problem.inner(y, y)):
            mem_s.append(s)
            mem_y.append(y)
            mem_rho.append(1.0 / sy)
            if len(mem_s) > cfg.memory:
                mem_s.pop(0), mem_y.pop(0), mem_rho.pop(0)
            yHy = problem.inner(y, problem.precondition(X_new, y))
            if yHy > 0:
                gamma = sy / yHy
        X, f, g = X_new, f_new, g_new
        track(X)

    diag["max_zero_average"] = problem.max_zero_average
    return X, f, it, gnorm, converged, diag


# ---------------------------------------------------------------------------
# solvers


def _check_endpoints(A0, A1, mass_constraint):
    if A0.grid != A1.grid:
        raise DomainError("endpoints live on different grids")
    for name, A in (("A0", A0), ("A1", A1)):
        if np.any(np.linalg.eigvalsh(A.values)[..., 0] <= 0):
            raise DomainError(f"endpoint {name} is not positive definite")
        if mass_constraint and abs(A.mass - 1.0) > 1e-9:
            raise DomainError(f"endpoint {name} has mass {A.mass!r}, expected 1")


def solve_schrodinger(
    A0: MatrixMeasure,
    A1: MatrixMeasure,
    cfg: SolverConfig,
    mass_constraint: bool = True,
    init: Optional[Path] = None,
) -> SolveReport:
    """Minimize ``action + epsilon^2 * path_fisher`` over paths joining ``A0`` and ``A1``.

    Parameters
    ----------
    A0, A1 : MatrixMeasure
        Positive definite endpoints on the same grid.
    cfg : SolverConfig
    mass_constraint : bool
        Keep every knot at unit mass (Fisher-Rao). ``False`` solves the
        unconstrained (Hellinger) problem, which decouples across cells.
    init : Path, optional
        Warm start; defaults to the retracted linear interpolation.

    Returns
    -------
    SolveReport
        ``converged`` is False if ``max_iter`` was reached or the line search
        stalled before the gradient norm dropped below ``grad_tol``.
    """
    _check_endpoints(A0, A1, mass_constraint)
    n = cfg.n_steps
    if init is None:
        path0 = linear_path(A0, A1, n, cfg.eig_floor)
    else:
        if init.n_steps != n or init.grid != A0.grid:
            raise DomainError("warm start path does not match the grid or n_steps")
        knots = np.array(init.knots)
        knots[1:-1] = _retract(knots[1:-1], A0.grid.weights, cfg.eig_floor, mass_constraint)
        knots[0], knots[-1] = A0.values, A1.values
        path0 = Path(A0.grid, knots, mass_constraint)
    problem = _Problem(A0, A1, cfg.epsilon, mass_constraint)
    X, f, iters, gnorm, converged, diag = _minimize(problem, np.array(path0.knots[1:-1]), cfg)
    act, fis = problem.parts(X)
    if cfg.epsilon == 0:
        fis = _fisher_terms(problem.full(X), problem.w)
    path = Path(A0.grid, problem.full(X), mass_constraint)
    value = act + cfg.epsilon**2 * fis
    logger.info(
        "eps=%g value=%.12g iterations=%d |g|=%.2e converged=%s", cfg.epsilon, value, iters, gnorm, converged
    )
    return SolveReport(
        value=value,
        action_part=act,
        fisher_part=fis,
        iterations=iters,
        final_grad_norm=gnorm,
        path=path,
        epsilon=cfg.epsilon,
        converged=converged,
        diagnostics=diag,
    )


def solve_geodesic(A0, A1, cfg: SolverConfig, mass_constraint: bool = True, init=None) -> SolveReport:
    """Minimal kinetic action between two measures (squared distance estimate).

    With ``mass_constraint=True`` this is the squared Fisher-Rao distance;
    without it, the squared Hellinger-type distance, equal to
    ``sum_k w_k * 4 * bures_sq(A0_k, A1_k)`` in the continuum limit.
    """
    return solve_schrodinger(A0, A1, cfg.replace(epsilon=0.0), mass_constraint, init)


@dataclass(frozen=True)
class GammaRow:
    epsilon: float
    value: float
    gap: float
    report: SolveReport = field(repr=False, compare=False)


def gamma_sweep(
    A0, A1, eps_list: Sequence[float], cfg: SolverConfig, mass_constraint: bool = True
) -> List[GammaRow]:
    """Solve the regularized problem for decreasing temperatures.

    Each solve is warm-started from the previous optimum. ``gap`` is the
    value minus the (unregularized) geodesic value.
    """
    eps = [float(e) for e in eps_list]
    if not eps:
        raise DomainError("eps_list is empty")
    if any(e < 0 for e in eps) or any(b >= a for a, b in zip(eps, eps[1:])):
        raise DomainError("eps_list must be nonnegative and strictly decreasing")
    geo = solve_geodesic(A0, A1, cfg, mass_constraint)
    rows = []
    init = None
    for e in eps:
        try:
            rep = solve_schrodinger(A0, A1, cfg.replace(epsilon=e), mass_constraint, init)
        except FRSError as exc:
            raise type(exc)(f"epsilon={e}: {exc}") from exc
        gap = 0.0 if e == 0 else rep.value - geo.value
        rows.append(GammaRow(e, rep.value, gap, rep))
        init = rep.path
    return rows


def geodesic_convexity_check(report: SolveReport, modulus: float = 0.5) -> float:
    """Largest violation of the modulus-convexity inequality of the entropy along a path.

    Returns ``max_j E(A_tj) - [(1 - t_j) E(A_0) + t_j E(A_1) - modulus/2 t_j (1 - t_j) value]``
    over all knots, endpoints included; a nonpositive result means no
    violation.
    """
    path = report.path
    t = path.times
    ent = np.array([entropy(m).value for m in path.measures])
    bound = (1 - t) * ent[0] + t * ent[-1] - 0.5 * modulus * t * (1 - t) * report.value
    return float(np.max(ent - bound))
