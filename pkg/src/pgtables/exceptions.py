"""Package exception types."""


class PGTablesError(Exception):
    """Base class for pgtables errors."""


class TableParseError(PGTablesError, ValueError):
    """Malformed table CSV; carries the offending line number when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ElicitationError(PGTablesError, ValueError):
    """Prior hyperparameters could not be mapped to a valid specification."""


class ElicitationWarning(UserWarning):
    """Moment map produced a technically valid but nearly singular scale matrix."""


class PriorParseError(PGTablesError, ValueError):
    """Prior-specification JSON is malformed or inconsistent."""


class NumericalError(PGTablesError, RuntimeError):
    """Fatal numerical failure inside a fitting or sampling routine."""
