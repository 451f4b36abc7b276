import csv
import json

import numpy as np

from bwrank.utils.audit import append_audit, close_audit, to_jsonable
from bwrank.utils.audit_logger import AuditEventType, AuditLevel, AuditLogger


def test_to_jsonable_unwraps_numpy():
    value = {"a": np.float64(1.5), "b": np.arange(3), 4: (np.int64(2),)}
    assert to_jsonable(value) == {"a": 1.5, "b": [0, 1, 2], "4": [2]}


def test_append_audit_forwards_to_logger():
    audit = AuditLogger()
    state = {"audit_logger": audit}
    append_audit(state, "loader", "loaded", {"n": np.int64(5)})
    assert state["audit_events"][0]["details"] == {"n": 5}
    assert audit.events[0].operation == "loader:loaded"


def test_events_are_buffered_until_a_run_dir_is_attached(tmp_path):
    audit = AuditLogger()
    audit.log_stage("loader", "loaded")
    audit.log_check("energy", False, 1e-3, 1e-7)
    audit.attach_run_dir(str(tmp_path), "demo")
    audit.log_artifact("csv", str(tmp_path / "demo.csv"), rows=3)

    with open(tmp_path / "audit_log.csv", newline="", encoding="utf-8") as f:
        rows = list(csv.DictReader(f))
    assert [r["Event Type"] for r in rows] == ["STAGE", "CHECK", "ARTIFACT"]
    assert json.loads(rows[2]["Details"])["rows"] == 3


def test_attach_keeps_the_first_directory(tmp_path):
    audit = AuditLogger(run_dir=str(tmp_path / "first"))
    audit.attach_run_dir(str(tmp_path / "second"))
    audit.log_system_event("START", "begin")
    assert (tmp_path / "first" / "audit_log.csv").exists()
    assert not (tmp_path / "second").exists()


def test_summary_and_export(tmp_path):
    audit = AuditLogger(run_label="demo")
    audit.log_check("energy", True, 1e-12, 1e-7)
    audit.log_check("oracle", False, 1e-3, 1e-6)
    audit.log_breakdown(0.33, -1e-17)
    summary = audit.generate_summary()
    assert summary["failed_checks"] == ["oracle"]
    assert summary["events_by_type"] == {"CHECK": 2, "BREAKDOWN": 1}
    assert summary["error_events"] == 2
    assert len(audit.get_events_by_level(AuditLevel.ERROR)) == 2
    assert len(audit.get_events_by_type(AuditEventType.CHECK)) == 2

    path = audit.export_audit_log(str(tmp_path / "audit.json"))
    with open(path, encoding="utf-8") as f:
        exported = json.load(f)
    assert exported["total_events"] == 3
    assert exported["events"][2]["event_type"] == "BREAKDOWN"


def test_close_audit_summarises_and_exports(tmp_path):
    run_dir = tmp_path / "nested" / "run"
    audit = AuditLogger(run_dir=str(run_dir), run_label="demo")
    state = {"audit_logger": audit}
    append_audit(state, "emitter", "written", {"artifacts": []})
    close_audit(state)
    assert state["audit_summary"]["events_by_type"] == {"STAGE": 1}
    with open(state["audit_export"], encoding="utf-8") as f:
        assert json.load(f)["events"][0]["operation"] == "emitter:written"


def test_close_audit_without_run_dir_only_summarises():
    state = close_audit({"audit_logger": AuditLogger()})
    assert state["audit_summary"]["total_events"] == 0
    assert "audit_export" not in state
    assert close_audit({}) == {}
