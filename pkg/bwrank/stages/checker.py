"""
Checker stage - evaluates the reproduction checks, if any, on the trajectory.
"""

from typing import Any, Dict

from bwrank.utils.audit import append_audit
from bwrank.utils.reproductions import get_reproduction


def run_checker(state: Dict[str, Any]) -> Dict[str, Any]:
    repro_id = state.get("reproduction_id")
    if not repro_id:
        state["checks"] = []
        return append_audit(state, "checker", "skipped", {"reason": "no reproduction checks requested"})

    repro = get_reproduction(repro_id)
    results = repro.run_checks(state["run_config"], state["trajectory"])
    state["checks"] = results

    logger = state.get("audit_logger")
    if logger is not None:
        for r in results:
            logger.log_check(r.name, r.passed, r.error, r.tolerance, r.details)

    failed = [r.name for r in results if not r.passed]
    return append_audit(state, "checker", "failed" if failed else "passed", {
        "reproduction": repro_id,
        "checks": len(results),
        "failed": failed,
    })
