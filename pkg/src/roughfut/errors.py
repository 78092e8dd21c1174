"""Exception types shared across the package."""


class RoughFutError(Exception):
    """Base class for all package errors."""


class ParseError(RoughFutError, ValueError):
    """Malformed input file. Carries the 1-based line number when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class InvariantError(RoughFutError, ValueError):
    """Structurally valid input that violates a documented invariant."""


class EmptyOutputError(RoughFutError, ValueError):
    """An operation produced no usable output (e.g. every day filtered out)."""


class InvalidParamError(RoughFutError, ValueError):
    """Model or configuration parameter outside its admissible range."""


class GridMismatchError(RoughFutError, ValueError):
    """A requested time is not a node of the simulation grid."""


class OutOfBandError(RoughFutError, ValueError):
    """Option price outside the static no-arbitrage band, no implied vol exists."""


class AlignmentError(RoughFutError, ValueError):
    """Model values do not line up one-to-one with market quotes."""


class InsufficientDataError(RoughFutError, ValueError):
    """Series too short for the requested lag structure."""


class DegenerateRegressionError(RoughFutError, ValueError):
    """Regression input has no usable spread (too few points or zero x-variance)."""
