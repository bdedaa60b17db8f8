"""JSON and CSV encodings of grids, measures, paths and solver reports.

Matrices are row-major nested lists of floats. Floats are written with
``repr`` precision so that every document re-parses to identical arrays.
"""
import csv
import json

import numpy as np

from .action import Path, SolveReport
from .measures import Grid, MatrixMeasure
from .symmat import sym

SCHEMA_VERSION = "1"


def dumps(obj) -> str:
    """Deterministic JSON text (sorted keys, LF line endings, trailing newline)."""
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_json(path, obj):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(obj))


def _finite(x):
    x = float(x)
    return x if np.isfinite(x) else None


def grid_to_dict(grid: Grid):
    raw = grid.weights * grid.original_volume * grid.matrix_dim
    out = {
        "matrix_dim": grid.matrix_dim,
        "weights": raw.tolist(),
        "normalized_weights": grid.weights.tolist(),
        "original_volume": grid.original_volume,
        "cell_ids": list(grid.cell_ids),
    }
    if grid.coords is not None:
        out["coords"] = grid.coords.tolist()
    return out


def grid_from_dict(data) -> Grid:
    d = int(data["matrix_dim"])
    coords = data.get("coords")
    ids = tuple(data.get("cell_ids", ()))
    if "normalized_weights" in data:
        return Grid(
            np.asarray(data["normalized_weights"], dtype=float),
            d,
            float(data.get("original_volume", 1.0)),
            None if coords is None else np.asarray(coords, dtype=float),
            ids,
        )
    return Grid.from_weights(data["weights"], d, coords, ids)


def measure_to_dict(A: MatrixMeasure):
    return {"grid": grid_to_dict(A.grid), "values": A.values.tolist(), "unit_mass": A.unit_mass}


def measure_from_dict(data) -> MatrixMeasure:
    grid = grid_from_dict(data["grid"])
    return MatrixMeasure(grid, sym(np.asarray(data["values"], dtype=float)), bool(data.get("unit_mass", True)))


def path_to_dict(path: Path):
    return {"grid": grid_to_dict(path.grid), "knots": path.knots.tolist(), "unit_mass": path.unit_mass}


def path_from_dict(data) -> Path:
    return Path(grid_from_dict(data["grid"]), np.asarray(data["knots"], dtype=float), bool(data["unit_mass"]))


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _finite(obj)
    return obj


def report_to_dict(report: SolveReport, include_path=True):
    out = {
        "value": report.value,
        "action_part": report.action_part,
        "fisher_part": report.fisher_part,
        "iterations": report.iterations,
        "final_grad_norm": report.final_grad_norm,
        "epsilon": report.epsilon,
        "converged": report.converged,
        "diagnostics": _clean(report.diagnostics),
    }
    out = _clean(out)
    if include_path:
        out["path"] = path_to_dict(report.path)
    return out


def report_from_dict(data) -> SolveReport:
    diag = {k: (np.inf if v is None else v) for k, v in data.get("diagnostics", {}).items()}
    return SolveReport(
        value=float(data["value"]),
        action_part=float(data["action_part"]),
        fisher_part=float(data["fisher_part"]),
        iterations=int(data["iterations"]),
        final_grad_norm=float(data["final_grad_norm"]),
        path=path_from_dict(data["path"]),
        epsilon=float(data["epsilon"]),
        converged=bool(data["converged"]),
        diagnostics=diag,
    )


def _fmt(x):
    return "" if x is None or not np.isfinite(x) else repr(float(x))


def write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])


def knot_rows(times, grid: Grid, knots):
    """Rows ``(t, cell_id, entries..., lambda_min)`` for a sequence of block fields."""
    d = grid.matrix_dim
    header = ["t", "cell_id"] + [f"a_{i}{j}" for i in range(d) for j in range(d)] + ["lambda_min"]
    rows = []
    lmin = np.linalg.eigvalsh(np.asarray(knots))[..., 0]
    for j, t in enumerate(times):
        for k, cid in enumerate(grid.cell_ids):
            rows.append([float(t), cid] + [float(v) for v in np.ravel(knots[j][k])] + [float(lmin[j, k])])
    return header, rows


def write_path_csv(path, p: Path):
    header, rows = knot_rows(p.times, p.grid, p.knots)
    write_csv(path, header, rows)
