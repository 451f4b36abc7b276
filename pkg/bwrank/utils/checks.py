from dataclasses import dataclass, field
from typing import Any, Dict

import numpy as np


@dataclass
class CheckResult:
    """One numerical check: an observed error against its tolerance."""
    name: str
    error: float
    tolerance: float
    details: Dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.error)) and self.error <= self.tolerance

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "error": self.error, "tolerance": self.tolerance,
                "passed": self.passed, **self.details}


def check(name: str, error: float, tolerance: float, **details) -> CheckResult:
    return CheckResult(name=name, error=float(error), tolerance=float(tolerance), details=details)


def sup_error(a, b) -> float:
    """Largest absolute entrywise difference."""
    diff = np.abs(np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64))
    return float(diff.max()) if diff.size else 0.0
