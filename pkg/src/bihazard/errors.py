"""Exception hierarchy shared across the package.

The CLI maps these onto process exit codes: ConfigError -> 2,
DataError (and subclasses) -> 3, NumericError -> 4.
"""


class BihazardError(Exception):
    """Base class for package errors."""


class ConfigError(BihazardError):
    """Invalid configuration, parameters, or unusable option combination."""


class DataError(BihazardError):
    """Malformed or inconsistent input data."""


class ObservabilityError(DataError):
    """A record's observable information cannot decide a required indicator."""


class ReductionError(DataError):
    """No marginal (per-axis) censoring reduction exists for this family."""


class NumericError(BihazardError):
    """Numerical failure: domain violations, divergent integrals, ..."""


class DomainError(NumericError):
    """Evaluation outside the mathematically valid domain."""


class QuantileRangeError(NumericError):
    """Requested quantile level is not attained by the step CDF."""
