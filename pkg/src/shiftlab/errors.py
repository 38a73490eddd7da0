"""Exception types raised across the package.

Every error carries a short machine-parsable ``category`` string; the CLI
prints it as a single ``error[<category>]: <message>`` line on stderr.
"""


class ShiftLabError(Exception):
    """Base class for all errors raised by this package."""

    category = "error"


class ConfigurationError(ShiftLabError):
    """Invalid parameter value or inconsistent configuration."""

    category = "config"


class UnsupportedRateError(ShiftLabError):
    """Requested resampling rate is not an integer divisor of the source rate."""

    category = "unsupported-rate"


class EmptyEpochSetError(ShiftLabError):
    """Windowing produced no epochs (recording shorter than one window)."""

    category = "empty-epochs"


class MissingBaselineError(ShiftLabError):
    """A subject lacks the rows required by the chosen normalization scheme."""

    category = "missing-baseline"


class DegenerateStatisticsError(ShiftLabError):
    """Too few rows to estimate normalization statistics."""

    category = "degenerate-statistics"


class DegenerateModelError(ShiftLabError):
    """Training data cannot produce a usable model (e.g. a single class)."""

    category = "degenerate-model"


class DimensionMismatchError(ShiftLabError):
    """Feature dimensionality differs between two inputs that must agree."""

    category = "dimension-mismatch"


class MissingInputError(ShiftLabError):
    """A required input file or directory does not exist."""

    category = "missing-input"
