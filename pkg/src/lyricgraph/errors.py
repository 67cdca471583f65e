"""Exception types shared across the toolkit.

The CLI maps these onto exit codes: usage errors exit 1, DataValidationError
exits 2, InternalInvariantError exits 3.
"""


class LyricGraphError(Exception):
    """Base class for all toolkit errors."""


class DataValidationError(LyricGraphError):
    """Raised when input data or parameters fail validation."""


class InternalInvariantError(LyricGraphError):
    """Raised when a state that should be impossible is observed."""
