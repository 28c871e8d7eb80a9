"""Trajectories and CSV tables with a ``#``-prefixed provenance header.

Floats are written with ``repr`` (shortest string that round-trips, at most
17 significant digits), so re-running a config reproduces files byte for byte.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import __version__
from ..errors import UsageError

TRAJECTORY_COLUMNS = (
    "t",
    "concurrence",
    "purity",
    "fidelity_ref",
    "gamma_a_abs",
    "gamma_a_arg",
    "gamma_b_abs",
    "lambda_plus_abs",
    "lambda_minus_abs",
)


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return value
    v = float(value)
    if math.isnan(v):
        return "nan"
    if v == 0.0:
        return "0.0"  # drop the sign of -0.0
    return repr(v)


def provenance(config=None, **extra) -> dict:
    """Ordered header entries: config hash, seed, tool version, then ``extra``."""
    head = {"tool": f"lindgap {__version__}"}
    if config is not None:
        head["config_hash"] = config.config_hash()
        head["scenario"] = config.scenario
        head["seed"] = config["seed"]
    head.update(extra)
    return head


@dataclass
class Trajectory:
    times: np.ndarray
    columns: dict
    header: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        for name, col in self.columns.items():
            if len(col) != len(self.times):
                raise ValueError(f"column {name} has {len(col)} rows, expected {len(self.times)}")

    def __len__(self):
        return len(self.times)

    def column(self, name) -> np.ndarray:
        if name == "t":
            return self.times
        return np.asarray(self.columns[name], dtype=float)

    @property
    def names(self):
        return ("t",) + tuple(self.columns)


def write_table(path, names, rows, header) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# {k}: {fmt(v) if not isinstance(v, str) else v}" for k, v in header.items()]
    lines.append(",".join(names))
    for row in rows:
        lines.append(",".join(fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def write_trajectory(path, traj: Trajectory) -> Path:
    rows = zip(traj.times, *(traj.columns[n] for n in traj.names[1:]))
    return write_table(path, traj.names, rows, traj.header)


def read_table(path):
    """Return ``(header dict, column names, list of row lists as strings)``."""
    path = Path(path)
    if not path.exists():
        raise UsageError(f"file not found: {path}")
    header, names, rows = {}, None, []
    for line in path.read_text().splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition(":")
            header[key.strip()] = value.strip()
        elif names is None:
            names = line.split(",")
        elif line:
            rows.append(line.split(","))
    if names is None:
        raise UsageError(f"{path}: no column header")
    return header, names, rows


def read_trajectory(path) -> Trajectory:
    header, names, rows = read_table(path)
    if not names or names[0] != "t":
        raise UsageError(f"{path}: first column must be 't'")
    data = np.array([[float(x) for x in r] for r in rows], dtype=float).reshape(len(rows), len(names))
    cols = {n: data[:, i] for i, n in enumerate(names) if i > 0}
    return Trajectory(data[:, 0], cols, header)
