"""
Flat-file I/O: whitespace-separated matrix files in, trajectory and monitor CSVs out.

Floats are written with repr() so identical runs produce byte-identical files.
"""

import csv
import os
from typing import List, Tuple, Union

import numpy as np
from numpy.typing import NDArray

from bwrank.utils.errors import ConfigError
from bwrank.utils.geodesics import Trajectory

PathLike = Union[str, os.PathLike]

STATE_BLOCKS = ("Q", "D", "B", "S")
MONITOR_FIELDS = ("energy", "momentum_residual", "bd_residual", "orthogonality_residual",
                  "reortho_correction", "min_eigenvalue")


def load_matrix(path: PathLike) -> NDArray[np.float64]:
    """One row per line, whitespace-separated decimals."""
    try:
        arr = np.loadtxt(path, dtype=np.float64, ndmin=2)
    except OSError as e:
        raise ConfigError(f"cannot read matrix file {path}: {e}") from e
    except ValueError as e:
        raise ConfigError(f"matrix file {path} is malformed: {e}") from e
    if not np.all(np.isfinite(arr)):
        raise ConfigError(f"matrix file {path} has non-finite entries")
    return arr


def _fmt(x: float) -> str:
    return repr(float(x))


def trajectory_header(traj: Trajectory) -> List[str]:
    first = traj.states[0]
    header = ["t"]
    for block in STATE_BLOCKS:
        rows, cols = getattr(first, block).shape
        header.extend(f"{block}[{i}][{j}]" for i in range(rows) for j in range(cols))
    return header


def trajectory_rows(traj: Trajectory) -> List[List[str]]:
    rows = []
    for t, s in zip(traj.times, traj.states):
        row = [_fmt(t)]
        for block in STATE_BLOCKS:
            row.extend(_fmt(x) for x in getattr(s, block).ravel())
        rows.append(row)
    return rows


def monitors_path(csv_path: PathLike) -> str:
    """Sibling path: run.csv -> run_monitors.csv."""
    root, ext = os.path.splitext(str(csv_path))
    return f"{root}_monitors{ext or '.csv'}"


def write_trajectory_csv(path: PathLike, traj: Trajectory) -> Tuple[str, str]:
    """Write the state CSV and its monitors sibling; returns both paths."""
    path = str(path)
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(trajectory_header(traj))
        writer.writerows(trajectory_rows(traj))

    mon_path = monitors_path(path)
    with open(mon_path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["t", *MONITOR_FIELDS])
        for m in traj.monitors:
            writer.writerow([_fmt(m.time), *(_fmt(getattr(m, name)) for name in MONITOR_FIELDS)])
    return path, mon_path


def read_trajectory_csv(path: PathLike) -> Tuple[List[str], NDArray[np.float64]]:
    """Header and numeric body of a CSV written by write_trajectory_csv."""
    with open(path, "r", newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader)
        body = np.array([[float(x) for x in row] for row in reader], dtype=np.float64)
    return header, body
