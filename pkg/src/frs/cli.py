"""Command-line driver: ``frs <command> --manifest FILE [--out DIR] [--threads N] [--verbose]``.

A manifest is a JSON document::

    {
      "version": "1",
      "command": "geodesic",
      "grid": {"cells": 4, "weights": "uniform", "matrix_dim": 2},
      "endpoints": {"generator": {"seed": 42, "eigenvalue_range": [0.2, 5.0]}},
      "solver": {"n_steps": 32, "grad_tol": 1e-5},
      "mass_constraint": true
    }

Endpoints may instead be given explicitly as ``{"A0": [...], "A1": [...]}``
with one ``d x d`` block per cell (a single block is accepted for one-cell
grids). ``bures`` and ``w2-gaussian`` take top-level ``A0``/``A1`` matrices
(and ``m0``/``m1`` means). ``heatflow`` takes ``A0``, ``t_end`` and ``dt``;
``gamma-sweep`` takes ``eps``.

Exit codes: 0 success, 2 validation error, 3 solver non-convergence,
4 internal error.
"""
import argparse
import json
import logging
import os
import platform
import sys
import time
from dataclasses import dataclass, field, fields

import numpy as np

from . import __version__
from .action import SolverConfig, gamma_sweep, solve_geodesic, solve_schrodinger
from .bures import GaussianParams, bures_dynamic_sq, bures_sq, gaussian_w2_sq
from .dynamics import dissipation_report, heat_flow_exact, heat_flow_integrate
from .exceptions import ConvergenceError, DimensionError, DomainError, FRSError
from .measures import Grid, make_measure
from .serialization import (
    SCHEMA_VERSION,
    knot_rows,
    measure_to_dict,
    report_to_dict,
    write_csv,
    write_json,
    write_path_csv,
)

logger = logging.getLogger("frs")

COMMANDS = ("bures", "w2-gaussian", "heatflow", "geodesic", "schrodinger", "gamma-sweep", "check")
SUPPORTED_VERSIONS = ("1",)

EXIT_OK, EXIT_VALIDATION, EXIT_NONCONVERGENCE, EXIT_INTERNAL = 0, 2, 3, 4


class ManifestError(DomainError):
    def __init__(self, message, where=None):
        super().__init__(f"{where}: {message}" if where else message)
        self.where = where


@dataclass
class Manifest:
    version: str
    command: str
    grid: dict = field(default_factory=dict)
    endpoints: dict = field(default_factory=dict)
    solver: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)


def parse_manifest(text, source="<manifest>") -> Manifest:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ManifestError(exc.msg, f"{source}:{exc.lineno}:{exc.colno}") from exc
    if not isinstance(data, dict):
        raise ManifestError("top level must be a JSON object", source)
    version = str(data.get("version", ""))
    if version not in SUPPORTED_VERSIONS:
        raise ManifestError(f"unsupported version {version!r}", "version")
    command = data.get("command")
    if command not in COMMANDS:
        raise ManifestError(f"unknown command {command!r}", "command")
    known = {f.name for f in fields(Manifest)} - {"params"}
    params = {k: v for k, v in data.items() if k not in known}
    for key in ("grid", "endpoints", "solver", "output"):
        if not isinstance(data.get(key, {}), dict):
            raise ManifestError("must be an object", key)
    return Manifest(
        version=version,
        command=command,
        grid=data.get("grid", {}),
        endpoints=data.get("endpoints", {}),
        solver=data.get("solver", {}),
        params=params,
        output=data.get("output", {}),
    )


def load_manifest(path) -> Manifest:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ManifestError(f"cannot read manifest: {exc.strerror}", str(path)) from exc
    return parse_manifest(text, str(path))


def _matrix(value, where):
    try:
        M = np.asarray(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ManifestError("expected a numeric matrix", where) from exc
    if M.ndim != 2 or M.shape[0] != M.shape[1] or not np.all(np.isfinite(M)):
        raise ManifestError(f"expected a finite square matrix, got shape {M.shape}", where)
    return M


def _blocks(value, grid, where):
    try:
        B = np.asarray(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ManifestError("expected numeric blocks", where) from exc
    if B.ndim == 2 and grid.n_cells == 1:
        B = B[None]
    if B.shape != grid.shape or not np.all(np.isfinite(B)):
        raise ManifestError(f"expected blocks of shape {grid.shape}, got {B.shape}", where)
    return B


def build_grid(spec, default_dim=None) -> Grid:
    d = spec.get("matrix_dim", spec.get("d", default_dim))
    if not isinstance(d, int) or d < 1:
        raise ManifestError("matrix_dim must be a positive integer", "grid.matrix_dim")
    weights = spec.get("weights", "uniform")
    try:
        if weights == "uniform":
            K = spec.get("cells", spec.get("K", 1))
            if not isinstance(K, int) or K < 1:
                raise ManifestError("cells must be a positive integer", "grid.cells")
            return Grid.uniform(K, d)
        if "cells" in spec and len(weights) != spec["cells"]:
            raise ManifestError("length differs from grid.cells", "grid.weights")
        return Grid.from_weights(weights, d, spec.get("coords"))
    except (TypeError, DomainError, DimensionError) as exc:
        if isinstance(exc, ManifestError):
            raise
        raise ManifestError(str(exc), "grid.weights") from exc


def generate_endpoints(spec, grid: Grid, unit_mass=True):
    """Seeded random endpoints: rotated diagonal blocks, then mass-normalized.

    ``spec`` holds ``seed`` and ``eigenvalue_range = [lo, hi]`` with
    ``0 < lo <= hi``. The same seed always gives the same pair.
    """
    lo, hi = spec.get("eigenvalue_range", (0.2, 5.0))
    lo, hi = float(lo), float(hi)
    if not lo <= hi:
        raise DomainError(f"empty eigenvalue range [{lo}, {hi}]")
    if lo <= 0:
        raise DomainError("eigenvalue range must lie in (0, inf)")
    rng = np.random.default_rng(int(spec.get("seed", 0)))
    d = grid.matrix_dim
    out = []
    for _ in range(2):
        blocks = np.empty(grid.shape)
        for k in range(grid.n_cells):
            Q, R = np.linalg.qr(rng.standard_normal((d, d)))
            Q = Q * np.where(np.diag(R) < 0, -1.0, 1.0)
            lam = rng.uniform(lo, hi, size=d)
            blocks[k] = (Q * lam) @ Q.T
        out.append(make_measure(grid, blocks, normalize=unit_mass, unit_mass=unit_mass))
    return tuple(out)


def build_endpoints(m: Manifest, grid: Grid, unit_mass=True):
    spec = m.endpoints or {k: m.params[k] for k in ("A0", "A1") if k in m.params}
    if not spec and "seed" in m.params:
        spec = {"generator": {k: m.params[k] for k in ("seed", "eigenvalue_range") if k in m.params}}
    try:
        if "generator" in spec:
            return generate_endpoints(spec["generator"], grid, unit_mass)
        if "A0" not in spec or "A1" not in spec:
            raise ManifestError("need A0 and A1 or a generator", "endpoints")
        normalize = bool(spec.get("normalize", False)) and unit_mass
        return tuple(
            make_measure(grid, _blocks(spec[key], grid, f"endpoints.{key}"), normalize, unit_mass)
            for key in ("A0", "A1")
        )
    except ManifestError:
        raise
    except (DomainError, DimensionError) as exc:
        raise ManifestError(str(exc), "endpoints") from exc


def build_solver(spec) -> SolverConfig:
    allowed = {f.name for f in fields(SolverConfig)}
    unknown = set(spec) - allowed
    if unknown:
        raise ManifestError(f"unknown keys {sorted(unknown)}", "solver")
    try:
        return SolverConfig(**spec)
    except (TypeError, DomainError) as exc:
        raise ManifestError(str(exc), "solver") from exc


def _number(m, key, default=None):
    v = m.params.get(key, default)
    if not isinstance(v, (int, float)) or isinstance(v, bool):
        raise ManifestError("expected a number", key)
    return float(v)


# ---------------------------------------------------------------------------
# commands


def _cmd_bures(m, out):
    A0 = _matrix(m.params.get("A0"), "A0")
    A1 = _matrix(m.params.get("A1"), "A1")
    try:
        result = {"bures_sq": bures_sq(A0, A1)}
    except (DomainError, DimensionError) as exc:
        raise ManifestError(str(exc), "A0/A1") from exc
    dyn = m.params.get("dynamic")
    if dyn:
        cfg = build_solver(m.solver)
        n = int(dyn.get("n_steps", cfg.n_steps)) if isinstance(dyn, dict) else cfg.n_steps
        result["dynamic_action"] = bures_dynamic_sq(A0, A1, n, cfg.replace(n_steps=n))
        result["dynamic_bures_sq"] = result["dynamic_action"] / 4.0
    return result, True


def _cmd_w2(m, out):
    try:
        A0 = _matrix(m.params.get("A0"), "A0")
        A1 = _matrix(m.params.get("A1"), "A1")
        g0 = GaussianParams(m.params.get("m0", np.zeros(A0.shape[0])), A0)
        g1 = GaussianParams(m.params.get("m1", np.zeros(A1.shape[0])), A1)
        value = gaussian_w2_sq(g0, g1)
    except ManifestError:
        raise
    except (DomainError, DimensionError) as exc:
        raise ManifestError(str(exc), "m0/m1/A0/A1") from exc
    return {"w2_sq": value, "bures_sq": bures_sq(A0, A1), "mean_sq": value - bures_sq(A0, A1)}, True


def _cmd_heatflow(m, out):
    spec = m.endpoints or m.params
    if "A0" not in spec:
        raise ManifestError("missing initial state", "A0")
    raw = np.asarray(spec["A0"], dtype=float)
    grid_spec = dict(m.grid)
    grid_spec.setdefault("matrix_dim", int(raw.shape[-1]))
    grid_spec.setdefault("cells", 1 if raw.ndim == 2 else int(raw.shape[0]))
    grid = build_grid(grid_spec)
    try:
        A0 = make_measure(grid, _blocks(raw, grid, "A0"), bool(spec.get("normalize", False)))
    except (DomainError, DimensionError) as exc:
        raise ManifestError(str(exc), "A0") from exc
    t_end = _number(m, "t_end", 2.0)
    dt = _number(m, "dt", 1e-3)
    try:
        trace = heat_flow_integrate(A0, t_end, dt)
    except DomainError as exc:
        raise ManifestError(str(exc), "t_end/dt") from exc
    residual = dict(dissipation_report(trace)) if len(trace) >= 3 else {}
    rows = [
        [float(t), float(e), float(f), residual.get(float(t), float("nan"))]
        for t, e, f in zip(trace.times, trace.entropy_series, trace.fisher_series)
    ]
    write_csv(os.path.join(out, "heatflow.csv"), ["t", "entropy", "fisher", "dissipation_residual"], rows)
    header, srows = knot_rows(trace.times, grid, np.array([s.values for s in trace.states]))
    write_csv(os.path.join(out, "heatflow_states.csv"), header, srows)
    exact = heat_flow_exact(A0, trace.times[-1])
    final = trace.states[-1]
    result = {
        "t_end": float(trace.times[-1]),
        "dt": dt,
        "final_state": measure_to_dict(final),
        "max_error_vs_exact": float(np.abs(final.values - exact.values).max()),
        "max_mass_drift": float(max(abs(s.mass - 1.0) for s in trace.states)),
        "max_dissipation_residual": float(max(residual.values())) if residual else 0.0,
    }
    return result, True


def _fr_setup(m, unit_mass):
    grid = build_grid(m.grid)
    A0, A1 = build_endpoints(m, grid, unit_mass)
    return A0, A1, build_solver(m.solver)


def _cmd_geodesic(m, out, schrodinger=False):
    unit_mass = bool(m.params.get("mass_constraint", True))
    A0, A1, cfg = _fr_setup(m, unit_mass)
    if schrodinger:
        if "epsilon" in m.params:
            cfg = cfg.replace(epsilon=_number(m, "epsilon"))
        rep = solve_schrodinger(A0, A1, cfg, unit_mass)
    else:
        rep = solve_geodesic(A0, A1, cfg, unit_mass)
    write_path_csv(os.path.join(out, "path.csv"), rep.path)
    return {"report": report_to_dict(rep)}, rep.converged


def _cmd_gamma(m, out):
    unit_mass = bool(m.params.get("mass_constraint", True))
    eps = m.params.get("eps", [0.5, 0.2, 0.1, 0.05])
    if not isinstance(eps, list) or not all(isinstance(e, (int, float)) for e in eps):
        raise ManifestError("expected a list of numbers", "eps")
    A0, A1, cfg = _fr_setup(m, unit_mass)
    try:
        rows = gamma_sweep(A0, A1, eps, cfg, unit_mass)
    except DomainError as exc:
        raise ManifestError(str(exc), "eps") from exc
    geo_value = rows[0].value - rows[0].gap if rows[0].epsilon > 0 else rows[0].value
    write_csv(
        os.path.join(out, "gamma.csv"),
        ["epsilon", "value", "gap"],
        [[r.epsilon, r.value, r.gap] for r in rows],
    )
    result = {
        "geodesic_value": geo_value,
        "rows": [
            {"epsilon": r.epsilon, "value": r.value, "gap": r.gap, "report": report_to_dict(r.report, False)}
            for r in rows
        ],
    }
    return result, all(r.report.converged for r in rows)


def _cmd_check(m, out, inject_fault=False):
    from .checks import run_checks

    results = run_checks(inject_fault=inject_fault)
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
    return {"checks": [{"name": n, "passed": ok} for n, ok, _ in results]}, all(ok for _, ok, _ in results)


HANDLERS = {
    "bures": _cmd_bures,
    "w2-gaussian": _cmd_w2,
    "heatflow": _cmd_heatflow,
    "geodesic": _cmd_geodesic,
    "schrodinger": lambda m, out: _cmd_geodesic(m, out, schrodinger=True),
    "gamma-sweep": _cmd_gamma,
}


def run(manifest: Manifest, out_dir=".", inject_fault=False) -> int:
    """Execute a manifest, write ``result.json`` (+ CSVs) into ``out_dir`` and return an exit code."""
    os.makedirs(out_dir, exist_ok=True)
    started = time.time()
    try:
        if manifest.command == "check":
            result, ok = _cmd_check(manifest, out_dir, inject_fault)
            code = EXIT_OK if ok else EXIT_INTERNAL
        else:
            result, ok = HANDLERS[manifest.command](manifest, out_dir)
            code = EXIT_OK if ok else EXIT_NONCONVERGENCE
    except ManifestError as exc:
        print(f"frs: validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ConvergenceError as exc:
        print(f"frs: solver did not converge: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except (DomainError, DimensionError) as exc:
        print(f"frs: validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except FRSError as exc:
        print(f"frs: error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    doc = {"schema_version": SCHEMA_VERSION, "command": manifest.command, "ok": bool(ok), "result": result}
    write_json(os.path.join(out_dir, "result.json"), doc)
    write_json(
        os.path.join(out_dir, "metadata.json"),
        {
            "frs_version": __version__,
            "numpy_version": np.__version__,
            "python": platform.python_version(),
            "started_unix": started,
            "elapsed_seconds": time.time() - started,
        },
    )
    return code


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="frs", description=__doc__.split("\n\n")[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--manifest", help="JSON manifest (optional for 'check')")
    parser.add_argument("--out", help="output directory (default: manifest output.dir or '.')")
    parser.add_argument("--threads", type=int, default=1, help="cap on BLAS worker threads")
    parser.add_argument("--verbose", action="store_true")
    parser.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)
    args = parser.parse_args(argv)

    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s"
    )
    try:
        if args.manifest:
            manifest = load_manifest(args.manifest)
        elif args.command == "check":
            manifest = Manifest(version="1", command="check")
        else:
            raise ManifestError("--manifest is required", "argv")
        if manifest.command != args.command:
            raise ManifestError(f"manifest command {manifest.command!r} != {args.command!r}", "command")
    except ManifestError as exc:
        print(f"frs: validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    from threadpoolctl import threadpool_limits

    try:
        with threadpool_limits(limits=max(1, args.threads)):
            return run(manifest, args.out or manifest.output.get("dir", "."), args.inject_fault)
    except Exception:  # noqa: BLE001 - last-resort exit code
        logger.exception("internal error")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
