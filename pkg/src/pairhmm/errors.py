"""Exception types shared across the package.

Every error carries a short machine-readable ``kind`` used in run reports
and for CLI exit-code mapping: data errors exit 2, numeric errors exit 3.
"""


class PairHmmError(Exception):
    kind = "error"


class DataError(PairHmmError):
    """Malformed or unusable input data."""

    kind = "data"


class ParseError(DataError):
    kind = "parse"

    def __init__(self, message, line=None):
        if line is not None:
            message = "line %d: %s" % (line, message)
        super().__init__(message)
        self.line = line


class InvalidQualityError(DataError):
    kind = "invalid-quality"


class DegenerateTransitionError(DataError):
    """Insertion and deletion probabilities sum to >= 1 at some read position."""

    kind = "degenerate-transition"


class ConfigTooSmallError(DataError):
    """No registered lane configuration can hold the read."""

    kind = "config-too-small"


class BudgetError(DataError):
    """A single work item exceeds the chunk memory budget."""

    kind = "budget"


class NumericError(PairHmmError):
    kind = "numeric"


class NumericOverflowError(NumericError):
    """Accumulator left the representable range (zero, inf or NaN)."""

    kind = "numeric-overflow"


class InvalidMeasurementError(NumericError):
    kind = "invalid-measurement"
