"""
Loader stage - parses the run config and resolves the run directory.
"""

import os
from typing import Any, Dict

from bwrank.config import get_settings
from bwrank.utils.audit import append_audit
from bwrank.utils.errors import ConfigError
from bwrank.utils.run_config import config_from_dict, load_run_config


def run_loader(state: Dict[str, Any]) -> Dict[str, Any]:
    """
    Build the RunConfig from either a config file or an in-memory config dict.

    Args:
        state: holds "config_path" or "config_data", optionally "out_dir"

    Returns:
        state with "run_config" and "run_dir", or "error" when the config is rejected
    """
    try:
        if state.get("config_data") is not None:
            cfg = config_from_dict(state["config_data"], label=state.get("label"))
        elif state.get("config_path"):
            cfg = load_run_config(state["config_path"])
        else:
            raise ConfigError("no config given")
    except ConfigError as e:
        state["error"] = {"stage": "loader", "kind": "config", **e.to_dict()}
        logger = state.get("audit_logger")
        if logger is not None:
            logger.log_error("LOAD_CONFIG", e.message, e.details)
        return append_audit(state, "loader", "rejected", {"error": e.message})

    run_dir = state.get("out_dir") or os.path.join(get_settings().runs_dir, cfg.label)
    state["run_config"] = cfg
    state["run_dir"] = run_dir
    logger = state.get("audit_logger")
    if logger is not None:
        logger.attach_run_dir(run_dir, cfg.label)

    return append_audit(state, "loader", "loaded", {
        "label": cfg.label,
        "n": cfg.n,
        "k": cfg.k,
        "t_max": cfg.t_max,
        "dt": cfg.dt,
        "reortho": cfg.reortho,
        "system": cfg.system,
        "seed": cfg.seed,
        "run_dir": run_dir,
    })
