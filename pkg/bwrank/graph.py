from typing import Any, Dict

from langgraph.graph import END, StateGraph

from bwrank.stages.checker import run_checker
from bwrank.stages.emitter import run_emitter
from bwrank.stages.integrator import run_integrator
from bwrank.stages.loader import run_loader
from bwrank.stages.reporter import run_reporter


def after_loader(state: Dict[str, Any]) -> str:
    """A rejected config ends the run at the reporter."""
    return "reporter" if state.get("error") else "integrator"


def after_integrator(state: Dict[str, Any]) -> str:
    """Route based on the integration outcome.

    Returns:
        - "reporter": D lost positivity; the partial trajectory is reported
        - "checker": the run reached t_max
    """
    return "reporter" if state.get("error") else "checker"


def build_graph():
    graph = StateGraph(Dict[str, Any])

    graph.add_node("loader", run_loader)
    graph.add_node("integrator", run_integrator)
    graph.add_node("checker", run_checker)
    graph.add_node("emitter", run_emitter)
    graph.add_node("reporter", run_reporter)

    graph.set_entry_point("loader")

    graph.add_conditional_edges(
        "loader",
        after_loader,
        {
            "reporter": "reporter",
            "integrator": "integrator",
        }
    )
    graph.add_conditional_edges(
        "integrator",
        after_integrator,
        {
            "reporter": "reporter",
            "checker": "checker",
        }
    )

    # checks are recorded before the artifacts so a failing reproduction still writes its files
    graph.add_edge("checker", "emitter")
    graph.add_edge("emitter", END)
    graph.add_edge("reporter", END)

    return graph.compile()
