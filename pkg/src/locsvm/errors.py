"""Exception types shared across the package.

The CLI maps these onto exit codes: configuration problems are usage
errors (2), malformed or inconsistent data is a data error (3), and a
failed factorization is a numerical error (4).
"""


class LocsvmError(Exception):
    """Base class for errors raised by this package."""


class ConfigError(LocsvmError):
    """Invalid configuration: bad grid bounds, schedule constants, etc."""


class DataFormatError(LocsvmError):
    """Malformed input data (parse failures carry a line number)."""


class DimensionMismatchError(LocsvmError):
    """Arrays whose shapes do not line up (features vs. model, etc.)."""


class NumericalError(LocsvmError):
    """A linear solve failed even after jitter retries."""
