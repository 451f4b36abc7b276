"""
Reporter stage - terminal node for runs that stopped early.

A breakdown still leaves a partial trajectory; it is written so the steps up
to the failure can be inspected.
"""

import os
from typing import Any, Dict

from bwrank.utils.audit import append_audit, close_audit
from bwrank.utils.matrix_io import write_trajectory_csv


def run_reporter(state: Dict[str, Any]) -> Dict[str, Any]:
    error = state.get("error") or {}
    logger = state.get("audit_logger")

    if error.get("kind") != "breakdown":
        append_audit(state, "reporter", "aborted", {"stage": error.get("stage"), "error": error.get("message")})
        return close_audit(state)

    if logger is not None:
        logger.log_breakdown(error["time"], error["min_eigenvalue"], {"message": error.get("message")})

    traj = state.get("trajectory")
    details: Dict[str, Any] = {"time": error["time"], "min_eigenvalue": error["min_eigenvalue"]}
    if traj is not None and traj.states:
        cfg = state["run_config"]
        csv_path, mon_path = write_trajectory_csv(
            os.path.join(state["run_dir"], f"{cfg.label}_partial.csv"), traj)
        state["artifacts"] = state.get("artifacts", []) + [
            {"kind": "csv", "path": csv_path, "rows": len(traj.states)},
            {"kind": "monitors", "path": mon_path, "rows": len(traj.monitors)},
        ]
        if logger is not None:
            logger.log_artifact("csv", csv_path, len(traj.states))
        details["partial_csv"] = csv_path
        details["steps_completed"] = len(traj.states) - 1

    append_audit(state, "reporter", "breakdown_reported", details)
    return close_audit(state)
