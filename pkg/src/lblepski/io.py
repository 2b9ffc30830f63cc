"""CSV and JSON persistence.

Floats are written with 17 significant digits so every value round-trips.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .calibration import SelectionPath
from .empirical_norms import RiskTable
from .kernel_estimator import EstimatorFamily
from .manifold_lab import PointCloud


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _write_rows(path, header, rows):
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")


def write_cloud_csv(path, cloud: PointCloud) -> None:
    if cloud.ambient_dim != 3:
        raise ValueError("CSV point clouds are x,y,z")
    header = ["x", "y", "z"] + (["f"] if cloud.f is not None else [])
    cols = [cloud.points] + ([cloud.f[:, None]] if cloud.f is not None else [])
    _write_rows(path, header, np.hstack(cols) if cloud.n else [])


def read_cloud_csv(path, intrinsic_dim: int = 2) -> PointCloud:
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader)]
        if header[:3] != ["x", "y", "z"] or len(header) > 4 or (len(header) == 4 and header[3] != "f"):
            raise ValueError(f"{path}: header must be x,y,z[,f], got {','.join(header)}")
        rows = [[float(v) for v in row] for row in reader if row]
    data = np.array(rows, dtype=float).reshape(-1, len(header))
    f = data[:, 3] if len(header) == 4 else None
    return PointCloud(data[:, :3], intrinsic_dim, f)


def write_family_csv(path, family: EstimatorFamily) -> None:
    rows = ((h, j, v) for h, vals in zip(family.grid, family.values) for j, v in enumerate(vals))
    _write_rows(path, ["h", "query_index", "value"], rows)


def write_risk_csv(path, table: RiskTable) -> None:
    _write_rows(path, ["h", "risk", "mc_std", "n1", "n2", "replicates"], table.rows())


def read_risk_csv(path) -> RiskTable:
    with Path(path).open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"{path}: empty risk table")
    col = lambda k: np.array([float(r[k]) for r in rows])
    return RiskTable(col("h"), col("risk"), col("mc_std"), int(rows[0]["n1"]),
                     int(rows[0]["n2"]), int(rows[0]["replicates"]))


def write_path_csv(path, sp: SelectionPath) -> None:
    _write_rows(path, ["a", "h_aa", "h_a2a"], sp.rows())


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def write_json(path, obj) -> None:
    text = json.dumps(_clean(obj), indent=2, sort_keys=True)
    Path(path).write_text(text + "\n")
