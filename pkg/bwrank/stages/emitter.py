"""
Emitter stage - writes the trajectory CSV, its monitors sibling and any SVG plots.
Relative output paths resolve against the run directory; with no csv target
the trajectory goes to <run_dir>/<label>.csv.
"""

import os
from typing import Any, Dict, List

from bwrank.utils.audit import append_audit, close_audit
from bwrank.utils.matrix_io import write_trajectory_csv
from bwrank.utils.plotting import plot_trajectory


def _resolve(run_dir: str, path: str) -> str:
    return path if os.path.isabs(path) else os.path.join(run_dir, path)


def run_emitter(state: Dict[str, Any]) -> Dict[str, Any]:
    cfg = state["run_config"]
    traj = state["trajectory"]
    run_dir = state["run_dir"]
    logger = state.get("audit_logger")

    csv_targets = [o.path for o in cfg.outputs if o.kind == "csv"] or [f"{cfg.label}.csv"]
    svg_targets = [o.path for o in cfg.outputs if o.kind == "svg"]

    artifacts: List[Dict[str, Any]] = []
    for target in csv_targets:
        csv_path, mon_path = write_trajectory_csv(_resolve(run_dir, target), traj)
        artifacts.append({"kind": "csv", "path": csv_path, "rows": len(traj.states)})
        artifacts.append({"kind": "monitors", "path": mon_path, "rows": len(traj.monitors)})
    for target in svg_targets:
        svg_path = plot_trajectory(_resolve(run_dir, target), traj, cfg.plot_entries, title=cfg.label)
        artifacts.append({"kind": "svg", "path": svg_path, "rows": None})

    if logger is not None:
        for a in artifacts:
            logger.log_artifact(a["kind"], a["path"], a["rows"])

    state["artifacts"] = state.get("artifacts", []) + artifacts
    append_audit(state, "emitter", "written", {"artifacts": [a["path"] for a in artifacts]})
    return close_audit(state)
