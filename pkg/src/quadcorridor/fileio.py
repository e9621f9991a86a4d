"""Scenario JSON files and trajectory CSV files.

Scenario files are canonical: sorted keys, two-space indent, floats written
with 17 significant digits, so load -> save is byte-stable.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .model import BoundaryConditions, PhysicalParams, Scenario, Trajectory
from .sets import Corridor

PARAM_FIELDS = (
    "mass",
    "dt",
    "rate_weight",
    "max_speed",
    "thrust_min",
    "thrust_max",
    "max_tilt",
    "max_thrust_rate",
)
CSV_HEADER = ["k", "time", "rx", "ry", "rz", "vx", "vy", "vz", "ux", "uy", "uz", "corridor"]
AXIS_TOL = 1e-9


def fmt(x: float) -> str:
    # + 0.0 folds -0.0 into 0.0, which JSON would read back as the integer 0
    return format(float(x) + 0.0, ".17g")


def _canonical(obj, indent: int = 0) -> str:
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_canonical(obj[k], indent + 1)}" for k in sorted(obj)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if seq and all(isinstance(v, (int, float, np.integer, np.floating)) for v in seq):
            return "[" + ", ".join(_canonical(v) for v in seq) + "]"
        if not seq:
            return "[]"
        return "[\n" + ",\n".join(pad + _canonical(v, indent + 1) for v in seq) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        if not np.isfinite(obj):
            raise ValueError(f"cannot serialise non-finite float {obj}")
        return fmt(obj)
    if obj is None:
        return "null"
    return json.dumps(obj)


def dumps(obj) -> str:
    return _canonical(obj) + "\n"


def atomic_write(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def scenario_to_dict(scenario: Scenario) -> dict:
    p, bc = scenario.params, scenario.boundary
    return {
        "params": {name: float(getattr(p, name)) for name in PARAM_FIELDS},
        "boundary": {name: [float(v) for v in getattr(bc, name)] for name in ("r0", "v0", "rf", "vf", "uf")},
        "corridors": [
            {
                "center": [float(v) for v in c.center],
                "axis": [float(v) for v in c.axis],
                "radius": c.radius,
                "half_length": c.half_length,
            }
            for c in scenario.corridors
        ],
        "meta": dict(scenario.meta),
    }


def scenario_from_dict(data: dict) -> Scenario:
    try:
        params = PhysicalParams(**{name: float(data["params"][name]) for name in PARAM_FIELDS})
        bc = BoundaryConditions(**{name: data["boundary"][name] for name in ("r0", "v0", "rf", "vf", "uf")})
        corridors = []
        for entry in data["corridors"]:
            axis = np.asarray(entry["axis"], dtype=float)
            norm = float(np.linalg.norm(axis))
            if abs(norm - 1.0) > AXIS_TOL:
                raise ValueError(f"corridor axis {axis.tolist()} is not unit length (norm {norm})")
            if abs(norm - 1.0) > 1e-12:  # keep exact bits when already unit so load -> save is stable
                axis = axis / norm
            corridors.append(Corridor(entry["center"], axis, entry["radius"], entry["half_length"]))
    except KeyError as exc:
        raise ValueError(f"scenario file is missing key {exc}") from None
    return Scenario(params, bc, corridors, dict(data.get("meta", {})))


def save_scenario(scenario: Scenario, path) -> None:
    atomic_write(path, dumps(scenario_to_dict(scenario)))


def load_scenario(path) -> Scenario:
    with open(path) as fh:
        return scenario_from_dict(json.load(fh))


def trajectory_csv(trajectory: Trajectory, dt: float, corridor=None) -> str:
    """CSV text; ``corridor`` holds a 1-based corridor index per knot."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    t = trajectory.horizon
    if corridor is None:
        corridor = np.zeros(t + 1, dtype=int)
    for k in range(t + 1):
        row = [str(k), fmt(k * dt)]
        row += [fmt(v) for v in trajectory.r[k]]
        row += [fmt(v) for v in trajectory.v[k]]
        row += [fmt(v) for v in trajectory.u[k]]
        row.append(str(int(corridor[k])))
        writer.writerow(row)
    return buf.getvalue()


def save_trajectory(trajectory: Trajectory, path, dt: float, corridor=None) -> None:
    atomic_write(path, trajectory_csv(trajectory, dt, corridor))


def load_trajectory(path):
    """Returns ``(trajectory, corridor_indices)``."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != CSV_HEADER:
            raise ValueError(f"unexpected trajectory header {header}")
        rows = [row for row in reader if row]
    if len(rows) < 2:
        raise ValueError("trajectory file needs at least two rows")
    for i, row in enumerate(rows):
        if len(row) != len(CSV_HEADER) or int(row[0]) != i:
            raise ValueError(f"malformed trajectory row {i}: {row}")
    data = np.array([[float(v) for v in row[2:11]] for row in rows])
    corridor = np.array([int(row[11]) for row in rows])
    return Trajectory(data[:, 0:3], data[:, 3:6], data[:, 6:9]), corridor
