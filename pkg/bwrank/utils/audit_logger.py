"""
Audit Logger
Structured record of what a run did: stages, checks, artifacts, breakdowns.
Events are kept in memory and, when a run directory is given, appended to
audit_log.csv inside it.
"""

import csv
import json
import logging
import os
from dataclasses import asdict, dataclass
from datetime import datetime
from enum import Enum
from typing import Any, Dict, List, Optional

from bwrank.utils.audit import to_jsonable

logger = logging.getLogger(__name__)


class AuditEventType(Enum):
    """Types of audit events."""
    STAGE = "STAGE"
    CHECK = "CHECK"
    ARTIFACT = "ARTIFACT"
    BREAKDOWN = "BREAKDOWN"
    ERROR = "ERROR"
    SYSTEM = "SYSTEM"


class AuditLevel(Enum):
    """Audit levels."""
    INFO = "INFO"
    WARNING = "WARNING"
    ERROR = "ERROR"
    CRITICAL = "CRITICAL"


@dataclass
class AuditEvent:
    """Audit event structure."""
    event_id: str
    timestamp: str
    event_type: AuditEventType
    level: AuditLevel
    operation: str
    details: Dict[str, Any]
    session_id: Optional[str] = None
    run_label: Optional[str] = None


class AuditLogger:
    """Collects audit events for one command invocation."""

    FIELDNAMES = ['Event ID', 'Timestamp', 'Event Type', 'Level', 'Operation',
                  'Details', 'Session ID', 'Run Label']

    def __init__(self, run_dir: Optional[str] = None, run_label: Optional[str] = None):
        self.run_dir = run_dir
        self.run_label = run_label
        self.audit_file = os.path.join(run_dir, "audit_log.csv") if run_dir else None
        self.session_id = f"SESSION-{datetime.now().strftime('%Y%m%d%H%M%S')}"
        self.events: List[AuditEvent] = []

    def attach_run_dir(self, run_dir: str, run_label: Optional[str] = None):
        """Start writing audit_log.csv under run_dir, flushing events recorded so far."""
        if self.audit_file:
            return
        self.run_dir = run_dir
        self.run_label = self.run_label or run_label
        self.audit_file = os.path.join(run_dir, "audit_log.csv")
        for event in self.events:
            self._write_to_csv(event)

    def log_stage(self, stage: str, action: str, details: Optional[Dict] = None):
        self._record(AuditEventType.STAGE, AuditLevel.INFO, f"{stage}:{action}", details or {})

    def log_check(self, check: str, passed: bool, error: float, tolerance: float,
                  details: Optional[Dict] = None):
        """Log a numerical check against its tolerance."""
        level = AuditLevel.INFO if passed else AuditLevel.ERROR
        self._record(AuditEventType.CHECK, level, f"CHECK_{check}", {
            'check': check,
            'passed': passed,
            'error': error,
            'tolerance': tolerance,
            'details': details or {},
        })

    def log_artifact(self, kind: str, path: str, rows: Optional[int] = None):
        self._record(AuditEventType.ARTIFACT, AuditLevel.INFO, f"WRITE_{kind.upper()}",
                     {'path': path, 'rows': rows})

    def log_breakdown(self, time: float, min_eigenvalue: float, details: Optional[Dict] = None):
        self._record(AuditEventType.BREAKDOWN, AuditLevel.ERROR, "INTEGRATION_BREAKDOWN", {
            'time': time,
            'min_eigenvalue': min_eigenvalue,
            'details': details or {},
        })

    def log_error(self, operation: str, error_message: str, error_details: Optional[Dict] = None):
        self._record(AuditEventType.ERROR, AuditLevel.ERROR, operation, {
            'error_message': error_message,
            'error_details': error_details or {},
        })

    def log_system_event(self, operation: str, description: str, details: Optional[Dict] = None):
        self._record(AuditEventType.SYSTEM, AuditLevel.INFO, operation, {
            'description': description,
            'details': details or {},
        })

    def _record(self, event_type: AuditEventType, level: AuditLevel, operation: str, details: Dict):
        event = AuditEvent(
            event_id=self._generate_event_id(),
            timestamp=datetime.now().isoformat(),
            event_type=event_type,
            level=level,
            operation=operation,
            details=to_jsonable(details),
            session_id=self.session_id,
            run_label=self.run_label,
        )
        self.events.append(event)
        if self.audit_file:
            self._write_to_csv(event)

    def _write_to_csv(self, event: AuditEvent):
        try:
            os.makedirs(self.run_dir, exist_ok=True)
            file_exists = os.path.exists(self.audit_file)
            with open(self.audit_file, 'a', newline='', encoding='utf-8') as f:
                writer = csv.DictWriter(f, fieldnames=self.FIELDNAMES)
                if not file_exists:
                    writer.writeheader()
                writer.writerow({
                    'Event ID': event.event_id,
                    'Timestamp': event.timestamp,
                    'Event Type': event.event_type.value,
                    'Level': event.level.value,
                    'Operation': event.operation,
                    'Details': json.dumps(event.details, default=str),
                    'Session ID': event.session_id,
                    'Run Label': event.run_label,
                })
        except OSError as e:
            logger.error("Error writing to audit log %s: %s", self.audit_file, e)

    def _generate_event_id(self) -> str:
        return f"EVT-{datetime.now().strftime('%Y%m%d%H%M%S')}-{len(self.events)+1:03d}"

    def get_events_by_type(self, event_type: AuditEventType) -> List[AuditEvent]:
        return [event for event in self.events if event.event_type == event_type]

    def get_events_by_level(self, level: AuditLevel) -> List[AuditEvent]:
        return [event for event in self.events if event.level == level]

    def failed_checks(self) -> List[AuditEvent]:
        return [e for e in self.get_events_by_type(AuditEventType.CHECK) if not e.details.get('passed')]

    def generate_summary(self) -> Dict[str, Any]:
        """Counts per type and the list of failed checks."""
        by_type: Dict[str, int] = {}
        for event in self.events:
            by_type[event.event_type.value] = by_type.get(event.event_type.value, 0) + 1
        return {
            'session_id': self.session_id,
            'run_label': self.run_label,
            'total_events': len(self.events),
            'error_events': len(self.get_events_by_level(AuditLevel.ERROR)),
            'events_by_type': by_type,
            'failed_checks': [e.details.get('check') for e in self.failed_checks()],
        }

    def export_audit_log(self, filename: str) -> str:
        """Export all events to a JSON file."""
        export_data = {
            'export_timestamp': datetime.now().isoformat(),
            'session_id': self.session_id,
            'total_events': len(self.events),
            'events': [{**asdict(e), 'event_type': e.event_type.value, 'level': e.level.value}
                       for e in self.events],
        }
        os.makedirs(os.path.dirname(filename) or ".", exist_ok=True)
        with open(filename, 'w', encoding='utf-8') as f:
            json.dump(export_data, f, indent=2, ensure_ascii=False, default=str)
        return filename
