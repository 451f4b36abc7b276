from typing import Any, Dict

from bwrank.utils.audit import append_audit
from bwrank.utils.errors import IntegrationBreakdown
from bwrank.utils.geodesics import conservation_report, fiber_report, gauge_energy_error, integrate


def run_integrator(state: Dict[str, Any]) -> Dict[str, Any]:
    """Integrate the geodesic system from the loaded initial data.

    A breakdown keeps the partial trajectory in state for the reporter.
    """
    cfg = state["run_config"]
    try:
        traj = integrate(cfg.initial_state(), cfg.t_max, dt=cfg.dt, reortho=cfg.reortho, system=cfg.system)
    except IntegrationBreakdown as e:
        state["trajectory"] = e.trajectory
        state["error"] = {"stage": "integrator", "kind": "breakdown", **e.to_dict()}
        return append_audit(state, "integrator", "breakdown", {
            "time": e.time,
            "min_eigenvalue": e.min_eigenvalue,
            "steps_completed": len(e.trajectory.states) - 1 if e.trajectory is not None else 0,
        })

    state["trajectory"] = traj
    state["conservation"] = conservation_report(traj)
    seed = cfg.seed if cfg.seed is not None else 0
    state["diagnostics"] = {
        **fiber_report(traj, cfg.angle_tol),
        "gauge_seed": seed,
        "gauge_energy_error": gauge_energy_error(traj.states[0], seed),
    }
    return append_audit(state, "integrator", "completed", {
        "steps": len(traj.states) - 1,
        "t_final": float(traj.times[-1]),
        **state["conservation"],
        **state["diagnostics"],
    })
