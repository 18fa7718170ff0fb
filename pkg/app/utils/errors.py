from typing import Any, Dict, Optional


class EngineError(Exception):
    """Base error for every failure raised by the evaluation engine"""

    def __init__(self, detail: str, context: Optional[Dict[str, Any]] = None):
        super().__init__(detail)
        self.detail = detail
        self.context = context or {}

    def to_dict(self) -> Dict[str, Any]:
        """Serializable view used by cycle failure records and logs"""
        data = {"error_type": type(self).__name__, "message": self.detail}
        if self.context:
            data["details"] = self.context
        return data


class ConfigurationError(EngineError):
    """Sensor specs or engine settings violate a model invariant"""


class RangeViolationError(EngineError):
    """A raw reading lies outside its sensor's physical range"""


class IncompleteFrameError(EngineError):
    """A reading frame does not carry exactly one value per configured sensor"""


class FrameOrderError(EngineError):
    """Frames arrived with a non-increasing timestamp"""


class SequenceError(EngineError):
    """A sequence is not a permutation of its cluster"""


class CouplingError(EngineError):
    """Coupling requested for invalid indices"""


class GuardViolationError(EngineError):
    """A cluster is too large for exhaustive evaluation under the configured guard"""


class OracleCapacityError(EngineError):
    """A cluster is too large for the brute-force oracle"""


class ReadingsError(EngineError):
    """A readings file cannot be parsed"""


class ManifestError(EngineError):
    """Run manifest is inconsistent (e.g. anomaly on an unknown sensor)"""


class ReportWriteError(EngineError):
    """A report or coupling dump cannot be written"""
