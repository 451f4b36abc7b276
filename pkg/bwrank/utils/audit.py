import os
from datetime import datetime, timezone
from typing import Any, Dict, List

import numpy as np


def to_jsonable(value: Any) -> Any:
    """Convert numpy scalars/arrays (possibly nested) into plain Python values."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    return value


def append_audit(state: Dict[str, Any], stage: str, action: str, details: Dict[str, Any]) -> Dict[str, Any]:
    events: List[Dict[str, Any]] = list(state.get("audit_events", []))
    events.append({
        "ts": datetime.now(timezone.utc).isoformat().replace("+00:00", "Z"),
        "stage": stage,
        "action": action,
        "details": to_jsonable(details),
    })
    state["audit_events"] = events
    logger = state.get("audit_logger")
    if logger is not None:
        logger.log_stage(stage, action, events[-1]["details"])
    return state


def close_audit(state: Dict[str, Any]) -> Dict[str, Any]:
    """Summarise the audit logger into state; export audit_log.json when it has a run directory."""
    logger = state.get("audit_logger")
    if logger is None:
        return state
    state["audit_summary"] = logger.generate_summary()
    if logger.run_dir:
        state["audit_export"] = logger.export_audit_log(os.path.join(logger.run_dir, "audit_log.json"))
    return state
