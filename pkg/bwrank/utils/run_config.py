"""
Run configuration files.

A run config is a JSON object; matrices are nested row arrays. Exactly one of
T0 (the initial Ḋ) and S0 (its Sylvester image) must be given; T0 is converted
with S0 = S_{D0}(T0) on load.
"""

import json
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Union

import numpy as np
from numpy.typing import NDArray

from bwrank.config import Settings, env_seed
from bwrank.utils.errors import BwRankError, ConfigError
from bwrank.utils.geodesics import SYSTEMS, GeodesicState
from bwrank.utils.manifolds import Frame, StiefelPoint
from bwrank.utils.matkernels import SpdMatrix, SymMatrix, sylvester_solve

_DEFAULTS = Settings()

ALLOWED_KEYS = {
    "n", "k", "Q0", "Qperp0", "D0", "B0", "T0", "S0", "t_max", "dt", "reortho",
    "seed", "rank_tol", "angle_tol", "outputs", "plot_entries", "label", "system",
}
OUTPUT_KINDS = ("csv", "svg")


@dataclass
class OutputTarget:
    kind: str
    path: str


@dataclass
class RunConfig:
    n: int
    k: int
    frame: Frame
    D0: SpdMatrix
    B0: NDArray[np.float64]
    S0: SymMatrix
    t_max: float = 1.0
    dt: float = _DEFAULTS.dt
    reortho: bool = _DEFAULTS.reortho
    seed: Optional[int] = None
    rank_tol: float = _DEFAULTS.rank_tol
    angle_tol: float = _DEFAULTS.angle_tol
    outputs: List[OutputTarget] = field(default_factory=list)
    plot_entries: Optional[Dict[str, List[List[int]]]] = None
    label: str = "run"
    system: str = "geodesic"

    def initial_state(self) -> GeodesicState:
        return GeodesicState(Q=self.frame.Q.Q, Qperp=self.frame.Qperp, D=self.D0.entries,
                             B=self.B0, S=self.S0.entries)


def _matrix(data: Dict[str, Any], key: str, shape) -> NDArray[np.float64]:
    try:
        arr = np.array(data[key], dtype=np.float64)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{key} is not a numeric matrix: {e}", {"key": key}) from e
    if arr.ndim == 1 and shape[1] == 1:
        arr = arr.reshape(-1, 1)
    if arr.shape != tuple(shape):
        raise ConfigError(f"{key} must have shape {shape}, got {arr.shape}", {"key": key})
    if not np.all(np.isfinite(arr)):
        raise ConfigError(f"{key} has non-finite entries", {"key": key})
    return arr


def _positive_int(data: Dict[str, Any], key: str) -> int:
    value = data.get(key)
    if not isinstance(value, int) or isinstance(value, bool) or value < 1:
        raise ConfigError(f"{key} must be a positive integer, got {value!r}", {"key": key})
    return value


def _outputs(raw: Any) -> List[OutputTarget]:
    if raw is None:
        return []
    if not isinstance(raw, list):
        raise ConfigError("outputs must be a list of {kind, path} objects")
    targets = []
    for entry in raw:
        if not isinstance(entry, dict) or entry.get("kind") not in OUTPUT_KINDS or not entry.get("path"):
            raise ConfigError(f"bad output target {entry!r}; kind must be one of {OUTPUT_KINDS}")
        targets.append(OutputTarget(kind=entry["kind"], path=str(entry["path"])))
    return targets


def config_from_dict(data: Dict[str, Any], label: Optional[str] = None) -> RunConfig:
    """Validate a parsed config object and build the RunConfig."""
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    unknown = sorted(set(data) - ALLOWED_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}", {"keys": unknown})
    missing = [key for key in ("n", "k", "Q0", "D0", "B0") if key not in data]
    if missing:
        raise ConfigError(f"missing config keys: {', '.join(missing)}", {"keys": missing})
    if ("T0" in data) == ("S0" in data):
        raise ConfigError("exactly one of T0 and S0 must be given")

    n, k = _positive_int(data, "n"), _positive_int(data, "k")
    if k > n:
        raise ConfigError(f"k={k} exceeds n={n}")

    try:
        if data["Q0"] == "identity-frame":
            frame = Frame.identity(n, k)
        else:
            Q0 = _matrix(data, "Q0", (n, k))
            if "Qperp0" in data:
                frame = Frame(StiefelPoint(Q0), _matrix(data, "Qperp0", (n, n - k)))
            else:
                frame = Frame.from_basis(Q0)
        D0 = SpdMatrix(_matrix(data, "D0", (k, k)))
        B0 = _matrix(data, "B0", (n - k, k))
        if "S0" in data:
            S0 = SymMatrix(_matrix(data, "S0", (k, k)))
        else:
            S0 = sylvester_solve(D0, SymMatrix(_matrix(data, "T0", (k, k))))
    except ConfigError:
        raise
    except BwRankError as e:
        raise ConfigError(f"invalid initial data: {e.message}", e.to_dict()) from e

    t_max = float(data.get("t_max", 1.0))
    dt = float(data.get("dt", _DEFAULTS.dt))
    if dt <= 0 or t_max < 0:
        raise ConfigError(f"need dt > 0 and t_max >= 0, got dt={dt}, t_max={t_max}")
    system = data.get("system", "geodesic")
    if system not in SYSTEMS:
        raise ConfigError(f"system must be one of {SYSTEMS}, got {system!r}")
    reortho = data.get("reortho", True)
    if isinstance(reortho, str):
        reortho = reortho.lower() in ("on", "true", "yes")

    seed = env_seed()
    if seed is None and data.get("seed") is not None:
        seed = data["seed"]
        if isinstance(seed, bool) or not isinstance(seed, int):
            raise ConfigError(f"seed must be an integer, got {seed!r}")
    if seed is not None and seed < 0:
        raise ConfigError(f"seed must be non-negative, got {seed}")
    try:
        rank_tol = float(data.get("rank_tol", _DEFAULTS.rank_tol))
        angle_tol = float(data.get("angle_tol", _DEFAULTS.angle_tol))
    except (TypeError, ValueError) as e:
        raise ConfigError(f"rank_tol and angle_tol must be numbers: {e}") from e
    if not (0.0 < rank_tol < 1.0 and 0.0 < angle_tol < 1.0):
        raise ConfigError(f"rank_tol and angle_tol must lie in (0, 1), got {rank_tol} and {angle_tol}")

    plot_entries = data.get("plot_entries")
    if plot_entries is not None:
        if not isinstance(plot_entries, dict) or not set(plot_entries) <= {"Q", "Qperp", "D", "B", "S"}:
            raise ConfigError("plot_entries must map block names (Q, Qperp, D, B, S) to [i, j] lists")

    return RunConfig(
        n=n, k=k, frame=frame, D0=D0, B0=B0, S0=S0,
        t_max=t_max, dt=dt, reortho=bool(reortho), seed=seed,
        rank_tol=rank_tol,
        angle_tol=angle_tol,
        outputs=_outputs(data.get("outputs")),
        plot_entries=plot_entries,
        label=str(data.get("label", label or "run")),
        system=system,
    )


def load_run_config(path: Union[str, os.PathLike]) -> RunConfig:
    """Read and validate a JSON run config; the label defaults to the file stem."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"config {path} is not valid JSON: {e}") from e
    stem = os.path.splitext(os.path.basename(str(path)))[0]
    return config_from_dict(data, label=stem)
