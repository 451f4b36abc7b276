"""
Exception hierarchy for bwrank.
Every error carries a `details` dict so pipeline stages can attach it to audit events.
"""

from typing import Any, Dict, Optional


class BwRankError(Exception):
    """Base class for all bwrank errors."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details: Dict[str, Any] = dict(details or {})

    def to_dict(self) -> Dict[str, Any]:
        return {"error": type(self).__name__, "message": self.message, **self.details}


class DimensionMismatchError(BwRankError):
    pass


class NonFiniteError(BwRankError):
    pass


class NotPositiveDefiniteError(BwRankError):
    """Raised when a matrix expected to be SPD has a too-small eigenvalue."""

    def __init__(self, message: str, eigenvalue: float, threshold: float):
        super().__init__(message, {"eigenvalue": eigenvalue, "threshold": threshold})
        self.eigenvalue = eigenvalue
        self.threshold = threshold


class NotPositiveSemidefiniteError(BwRankError):
    def __init__(self, message: str, eigenvalue: float, threshold: float):
        super().__init__(message, {"eigenvalue": eigenvalue, "threshold": threshold})
        self.eigenvalue = eigenvalue
        self.threshold = threshold


class NotOrthogonalError(BwRankError):
    def __init__(self, message: str, residual: float):
        super().__init__(message, {"residual": residual})
        self.residual = residual


class TangencyError(BwRankError):
    def __init__(self, message: str, residual: float):
        super().__init__(message, {"residual": residual})
        self.residual = residual


class RankError(BwRankError):
    def __init__(self, message: str, rank: int, expected: Optional[int] = None):
        super().__init__(message, {"rank": rank, "expected": expected})
        self.rank = rank
        self.expected = expected


class SubspaceMismatchError(BwRankError):
    def __init__(self, message: str, max_angle: float):
        super().__init__(message, {"max_angle": max_angle})
        self.max_angle = max_angle


class DomainExceededError(BwRankError):
    """The closed form was evaluated past the end of its domain."""

    def __init__(self, message: str, t: float, t_max: float):
        super().__init__(message, {"t": t, "t_max": t_max})
        self.t = t
        self.t_max = t_max


class IntegrationBreakdown(BwRankError):
    """D lost positivity (or became singular) during integration."""

    def __init__(self, message: str, time: float, min_eigenvalue: float, trajectory: Any = None):
        super().__init__(message, {"time": time, "min_eigenvalue": min_eigenvalue})
        self.time = time
        self.min_eigenvalue = min_eigenvalue
        self.trajectory = trajectory


class CertificateError(BwRankError):
    """A logarithm rotation failed XᵀY·R = (XᵀYYᵀX)^{1/2}."""

    def __init__(self, message: str, residual: float, tolerance: float):
        super().__init__(message, {"residual": residual, "tolerance": tolerance})
        self.residual = residual
        self.tolerance = tolerance


class CountMismatchError(BwRankError):
    def __init__(self, message: str, svd_count: int, angle_count: int):
        super().__init__(message, {"svd_count": svd_count, "angle_count": angle_count})
        self.svd_count = svd_count
        self.angle_count = angle_count


class ConfigError(BwRankError):
    pass
