"""Exception types raised across the package."""


class DwellcertError(Exception):
    """Base class for all package errors."""


class DimensionError(DwellcertError, ValueError):
    """Matrix or vector shapes do not conform."""


class ParseError(DwellcertError, ValueError):
    """A system document violates the input schema; names the field."""


class NumericalError(DwellcertError, RuntimeError):
    """An iterative numerical routine failed to converge."""


class BracketError(DwellcertError, ValueError):
    """A bisection bracket does not straddle a feasibility change."""


class UsageError(DwellcertError, ValueError):
    """An operation was called with arguments outside its contract."""
