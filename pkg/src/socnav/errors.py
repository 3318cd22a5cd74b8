"""Exception types shared across the package."""


class SocnavError(Exception):
    """Base class for all socnav errors."""


class ConfigError(SocnavError):
    """Bad run configuration: unknown keys, invalid values, missing paths."""


class CoincidentObstacleError(SocnavError):
    """Robot center coincides with an obstacle center; the scene is degenerate."""


class SamplingExhaustedError(SocnavError):
    """Rejection sampling gave up; the sampling config is over-constrained."""


class LengthMismatchError(SocnavError):
    """Sequences that must be aligned step-for-step have different lengths."""


class InsufficientPointsError(SocnavError):
    """Not enough trajectory points to draw the requested context/target sets."""


class MalformedRecordError(SocnavError):
    """A persisted record failed to parse; carries the offending line number."""

    def __init__(self, path: str, line_no: int, reason: str):
        super().__init__(f"{path}:{line_no}: {reason}")
        self.path = path
        self.line_no = line_no
        self.reason = reason


class EmptyContextError(SocnavError):
    """Prediction was requested with no conditioning points."""


class DimensionMismatchError(SocnavError):
    """Inputs do not match the model layout's channel dimensions."""


class VersionMismatchError(SocnavError):
    """Checkpoint header is missing, corrupt, or from an unsupported version."""


class ScenarioSetMismatchError(SocnavError):
    """Two metric blocks were computed on different scenario sets."""
