"""Self-contained invariant suite behind ``frs check``.

Each group returns ``(name, passed, detail)``. The groups are reduced-size
versions of the test suite and finish in well under a minute.
"""
import numpy as np

from .action import Path, SolverConfig, gamma_sweep, path_action, path_action_gradient, solve_geodesic
from .bures import bures_dynamic_sq, bures_sq
from .dynamics import dissipation_report, heat_flow_exact, heat_flow_integrate
from .measures import Grid, entropy, fisher_info, fr_norm_sq, make_measure, project_tangent
from .symmat import lyapunov_solve, sqrtm, sym


def random_spd(rng, d, lo=0.2, hi=5.0, size=None):
    """Random SPD matrices ``Q diag(lambda) Q^T`` with eigenvalues uniform in ``[lo, hi]``."""
    shape = () if size is None else (size,)
    G = rng.standard_normal(shape + (d, d))
    Q, R = np.linalg.qr(G)
    Q = Q * np.sign(np.diagonal(R, axis1=-2, axis2=-1))[..., None, :]
    lam = rng.uniform(lo, hi, size=shape + (d,))
    return (Q * lam[..., None, :]) @ np.swapaxes(Q, -1, -2)


def random_measure(rng, grid, lo=0.2, hi=5.0):
    return make_measure(grid, random_spd(rng, grid.matrix_dim, lo, hi, grid.n_cells), normalize=True)


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def check_symmat(rng, fault):
    worst = 0.0
    for _ in range(200):
        d = int(rng.integers(1, 6))
        A = random_spd(rng, d)
        U = sym(rng.standard_normal((d, d)))
        back = lyapunov_solve(A, sym(A @ U))
        worst = max(worst, np.abs(back - U).max() / max(np.abs(U).max(), 1e-300))
        R = sqrtm(A)
        worst = max(worst, np.abs(R @ R - A).max() / np.abs(A).max())
    return worst <= 1e-8, f"max rel error {worst:.2e}"


def check_bures(rng, fault):
    worst = 0.0
    for _ in range(3):
        d = int(rng.integers(2, 4))
        A0, A1 = random_spd(rng, d), random_spd(rng, d)
        closed = bures_sq(A0, A1) * (1.0 + (1e-2 if fault else 0.0))
        worst = max(worst, _rel(bures_dynamic_sq(A0, A1, 32) / 4.0, closed))
    return worst <= 1e-3, f"dynamic/static rel error {worst:.2e}"


def check_functionals(rng, fault):
    grid = Grid.uniform(3, 2)
    worst_fd, worst_id = 0.0, 0.0
    for _ in range(10):
        A = random_measure(rng, grid)
        val = entropy(A, gradient=True)
        worst_id = max(worst_id, _rel(fr_norm_sq(A, val.potential), fisher_info(A).value))
        V = project_tangent(A, sym(rng.standard_normal(grid.shape)))
        xi = V.vector()
        exact = float(grid.integrate(np.sum(val.gradient * V.potentials, axis=(-2, -1))))
        h = 1e-4
        plus = entropy(make_measure(grid, A.values + h * xi)).value
        minus = entropy(make_measure(grid, A.values - h * xi)).value
        worst_fd = max(worst_fd, _rel((plus - minus) / (2 * h), exact))
    ok = worst_fd <= 1e-4 and worst_id <= 1e-8
    return ok, f"fd rel {worst_fd:.2e}, fisher identity rel {worst_id:.2e}"


def check_heat_flow(rng, fault):
    grid = Grid.uniform(1, 2)
    A0 = make_measure(grid, np.diag([1.5, 0.5])[None])
    trace = heat_flow_integrate(A0, 2.0, 1e-3)
    err = np.abs(trace.states[-1].values - heat_flow_exact(A0, 2.0).values).max()
    res = max(r for _, r in dissipation_report(trace))
    mono = np.all(np.diff(trace.entropy_series) <= 1e-9) and np.all(np.diff(trace.fisher_series) <= 1e-9)
    ok = err <= 1e-8 and res <= 1e-5 and mono
    return ok, f"rk4 error {err:.2e}, dissipation residual {res:.2e}"


def check_action_gradient(rng, fault):
    grid = Grid.uniform(2, 2)
    worst = 0.0
    for _ in range(5):
        knots = np.array([random_measure(rng, grid).values for _ in range(4)])
        path = Path(grid, knots)
        _, G = path_action_gradient(path)
        D = sym(rng.standard_normal(knots.shape))
        D[[0, -1]] = 0.0
        exact = float(np.sum(np.sum(G * D, axis=(-2, -1)) @ grid.weights))
        h = 1e-5
        fd = (path_action(Path(grid, knots + h * D)) - path_action(Path(grid, knots - h * D))) / (2 * h)
        worst = max(worst, _rel(fd, exact))
    return worst <= 1e-5, f"fd rel {worst:.2e}"


def check_scalar_fisher_rao(rng, fault):
    grid = Grid.uniform(2, 1)
    p = np.array([0.8, 0.2])
    A0 = make_measure(grid, (p / grid.weights)[:, None, None])
    A1 = make_measure(grid, (p[::-1] / grid.weights)[:, None, None])
    rep = solve_geodesic(A0, A1, SolverConfig(n_steps=64))
    exact = 4.0 * np.arccos(0.8) ** 2
    err = _rel(rep.value, exact)
    feas = rep.diagnostics["max_mass_error"] <= 1e-9
    return err <= 5e-3 and feas and rep.converged, f"rel error {err:.2e}"


def check_gamma_trend(rng, fault):
    grid = Grid.uniform(2, 2)
    A0, A1 = random_measure(rng, grid), random_measure(rng, grid)
    rows = gamma_sweep(A0, A1, [0.5, 0.1], SolverConfig(n_steps=16))
    gaps = [r.gap for r in rows]
    ok = gaps[0] > gaps[1] > 0
    return ok, "gaps " + ", ".join(f"{g:.3e}" for g in gaps)


GROUPS = [
    ("symmat", check_symmat),
    ("bures", check_bures),
    ("functionals", check_functionals),
    ("heat_flow", check_heat_flow),
    ("action_gradient", check_action_gradient),
    ("scalar_fisher_rao", check_scalar_fisher_rao),
    ("gamma_trend", check_gamma_trend),
]


def run_checks(seed=0, inject_fault=False):
    """Run every invariant group; ``inject_fault`` perturbs one reference value."""
    rng = np.random.default_rng(seed)
    results = []
    for name, fn in GROUPS:
        try:
            ok, detail = fn(rng, inject_fault)
        except Exception as exc:  # noqa: BLE001 - a crashing group is a failed group
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append((name, bool(ok), detail))
    return results
