import json
import os

import pytest

from bwrank.graph import after_integrator, after_loader, build_graph
from bwrank.utils.audit_logger import AuditEventType, AuditLogger
from conftest import sample_path


@pytest.fixture(scope="module")
def graph():
    return build_graph()


def _stages(result):
    return [(e["stage"], e["action"]) for e in result["audit_events"]]


def test_routing_functions():
    assert after_loader({"error": {"kind": "config"}}) == "reporter"
    assert after_loader({}) == "integrator"
    assert after_integrator({"error": {"kind": "breakdown"}}) == "reporter"
    assert after_integrator({"trajectory": object()}) == "checker"


def test_plain_run_writes_artifacts(graph, tmp_path):
    out = tmp_path / "ex3"
    audit = AuditLogger(run_dir=str(out))
    result = graph.invoke({"config_path": sample_path("ex3-a.json"), "out_dir": str(out),
                           "audit_logger": audit})
    assert not result.get("error")
    assert _stages(result) == [("loader", "loaded"), ("integrator", "completed"),
                               ("checker", "skipped"), ("emitter", "written")]
    kinds = [a["kind"] for a in result["artifacts"]]
    assert kinds == ["csv", "monitors", "svg"]
    for a in result["artifacts"]:
        assert os.path.exists(a["path"])
    assert result["artifacts"][0]["rows"] == 1001
    assert (out / "audit_log.csv").exists()
    assert len(audit.get_events_by_type(AuditEventType.ARTIFACT)) == 3
    assert result["audit_summary"]["total_events"] == len(audit.events)
    exported = json.loads((out / "audit_log.json").read_text(encoding="utf-8"))
    assert exported["total_events"] == len(audit.events)
    diag = result["diagnostics"]
    assert diag["gauge_seed"] == 7
    assert diag["gauge_energy_error"] <= 1e-12
    assert not diag["stays_in_fiber"]


def test_run_dir_defaults_under_runs_dir(graph, tmp_path):
    cfg = json.loads(open(sample_path("vertical.json"), encoding="utf-8").read())
    cfg["t_max"] = 0.1
    result = graph.invoke({"config_data": cfg, "label": "vertical"})
    assert result["run_dir"] == os.path.join(str(tmp_path / "runs"), result["run_config"].label)
    assert os.path.exists(result["artifacts"][0]["path"])
    assert result["diagnostics"]["stays_in_fiber"]
    assert result["diagnostics"]["gauge_seed"] == 0


def test_reproduction_checks_are_logged(graph, tmp_path):
    from bwrank.utils.reproductions import get_reproduction

    audit = AuditLogger()
    result = graph.invoke({"config_data": get_reproduction("ex2-nk1").config, "label": "ex2-nk1",
                           "reproduction_id": "ex2-nk1", "out_dir": str(tmp_path / "ex2"),
                           "audit_logger": audit})
    assert result["checks"] and all(c.passed for c in result["checks"])
    assert len(audit.get_events_by_type(AuditEventType.CHECK)) == len(result["checks"])
    assert audit.failed_checks() == []


def test_malformed_config_is_reported(graph, tmp_path):
    audit = AuditLogger()
    result = graph.invoke({"config_path": sample_path("malformed.json"), "audit_logger": audit})
    assert result["error"]["kind"] == "config"
    assert _stages(result) == [("loader", "rejected"), ("reporter", "aborted")]
    assert "trajectory" not in result
    assert len(audit.get_events_by_type(AuditEventType.ERROR)) == 1
    assert result["audit_summary"]["error_events"] == 1
    assert "audit_export" not in result


def test_breakdown_writes_partial_trajectory(graph, tmp_path):
    out = tmp_path / "bd"
    audit = AuditLogger()
    result = graph.invoke({"config_path": sample_path("breakdown.json"), "out_dir": str(out),
                           "audit_logger": audit})
    error = result["error"]
    assert error["kind"] == "breakdown"
    assert 0.32 < error["time"] < 0.34
    assert _stages(result)[-1] == ("reporter", "breakdown_reported")
    partial = [a for a in result["artifacts"] if a["kind"] == "csv"]
    assert partial and partial[0]["path"].endswith("breakdown_partial.csv")
    assert os.path.exists(partial[0]["path"])
    assert len(audit.get_events_by_type(AuditEventType.BREAKDOWN)) == 1
    # the logger had no run dir until the loader attached one
    assert (out / "audit_log.csv").exists()
