"""CSV and JSON serialisation shared by the command line tools.

Floats are written with 17 significant digits so that a CSV round trip
reproduces every double exactly.  JSON is written with sorted keys and no
timestamps so identical runs give identical bytes.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from . import __version__


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def _header(m: int, last: str) -> list[str]:
    cols = ["n"]
    for k in range(1, m + 1):
        cols += [f"re_{k}", f"im_{k}"]
    return cols + [last]


def write_points_csv(path, points: np.ndarray, values: np.ndarray, last: str) -> None:
    """Rows ``n, re_1, im_1, ..., re_m, im_m, <last>``; missing values are blank."""
    points = np.asarray(points, dtype=complex)
    m = points.shape[1]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(_header(m, last))
        for n, row in enumerate(points):
            cells = [str(n)]
            for z in row:
                cells += [fmt(z.real), fmt(z.imag)]
            cells.append(fmt(values[n]) if n < len(values) else "")
            w.writerow(cells)


def write_orbit_csv(path, orbit) -> None:
    write_points_csv(path, orbit.points, orbit.shadowing_defects, "defect")


def write_dorbit_csv(path, dorbit) -> None:
    write_points_csv(path, dorbit.points, dorbit.conjugacy_defects, "conj_defect")


def read_points_csv(path) -> tuple[np.ndarray, np.ndarray, str]:
    """Inverse of :func:`write_points_csv`; returns points, values, last column name."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty file")
    header = rows[0]
    if header[0] != "n" or len(header) < 4 or len(header) % 2:
        raise ValueError(f"{path}: unexpected header {header}")
    m = (len(header) - 2) // 2
    if header != _header(m, header[-1]):
        raise ValueError(f"{path}: unexpected header {header}")
    body = rows[1:]
    pts = np.empty((len(body), m), dtype=complex)
    vals = []
    for i, row in enumerate(body):
        if int(row[0]) != i:
            raise ValueError(f"{path}: row {i} has index {row[0]}")
        nums = [float(c) for c in row[1 : 1 + 2 * m]]
        pts[i] = np.array(nums[0::2]) + 1j * np.array(nums[1::2])
        if row[-1] != "":
            vals.append(float(row[-1]))
    return pts, np.array(vals), header[-1]


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def envelope(command: str, config: dict, seed, policy: dict | None, result: dict, passed: bool) -> dict:
    return {
        "command": command,
        "config": config,
        "seed": seed,
        "tolerance_policy": policy,
        "version": f"dense_orbits {__version__}",
        "result": result,
        "verdict": "pass" if passed else "fail",
    }


def write_json(path, payload: dict) -> None:
    text = json.dumps(_clean(payload), indent=2, sort_keys=True)
    Path(path).write_text(text + "\n")
