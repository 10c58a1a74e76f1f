"""Exception types shared across the testbed."""


class TissueBenchError(Exception):
    """Base class for all testbed errors."""


class ConfigError(TissueBenchError, ValueError):
    """Invalid or inconsistent configuration."""


class RangeError(TissueBenchError, ValueError):
    """Input outside its documented physical range."""


class KinematicsError(TissueBenchError, ValueError):
    """Geometric quantity (radius, lever arm) that makes the kinematics undefined."""


class CalibrationError(TissueBenchError, ValueError):
    """Calibration targets that cannot be realized by the contact model."""


class ContractError(TissueBenchError, ValueError):
    """Caller violated an operation precondition (bad variance, bad probability)."""


class StreamError(TissueBenchError, ValueError):
    """Malformed telemetry stream (timestamp regression, truncated record)."""


class SummaryError(TissueBenchError, ValueError):
    """Summary requested over an empty or out-of-range window."""


class TelemetrySchemaError(TissueBenchError, ValueError):
    """Telemetry file whose columns do not match the documented schema."""


class FitError(TissueBenchError, ValueError):
    """Regression fit on a rank-deficient or degenerate design."""
