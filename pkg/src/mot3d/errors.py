"""Exception types shared across the package."""


class Mot3dError(Exception):
    """Base class for all package-specific errors."""


class FrameMismatchError(Mot3dError):
    """Two geometric objects live in different coordinate frames."""


class ParseError(Mot3dError):
    """A file could not be parsed; the message carries path and line context."""


class CalibrationError(Mot3dError):
    """Noise calibration failed (too few pairs or degenerate variance)."""


class UpdateError(Mot3dError):
    """A filter update could not be computed (singular innovation covariance)."""


class SequencingError(Mot3dError):
    """An operation was applied out of temporal order."""


class EvaluationError(Mot3dError):
    """Metric evaluation inputs are inconsistent."""


class ScenarioError(Mot3dError):
    """A simulation scenario failed validation; message lists all violations."""
