"""Exception taxonomy shared across the toolkit.

Each class maps to one failure family so the CLI can translate them into
stable exit codes (data/config -> 2, numeric failure -> 3).
"""


class ToolkitError(Exception):
    """Base class for all gwkae errors."""


class DataError(ToolkitError):
    """Malformed or inconsistent input data (bad CSV row, non-finite sample, missing DI)."""


class ConfigError(ToolkitError):
    """Invalid configuration or geometry setup (bad region, burst longer than window)."""


class ShapeError(ToolkitError):
    """Dimension mismatch between an operand and a model or layer contract."""


class GeometryError(ToolkitError):
    """Degenerate geometry, e.g. coincident actuator and sensor positions."""


class TrainingError(ToolkitError):
    """Numeric failure during optimization (non-finite loss or gradient)."""


class PersistenceError(ToolkitError):
    """Unreadable, corrupt, or version-incompatible artifact file."""


class CalibrationError(ToolkitError):
    """Detection requested for a region without a calibrated threshold."""


class UsageError(ToolkitError):
    """API misuse, e.g. detecting against a threshold from a different region."""
