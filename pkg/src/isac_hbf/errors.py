"""Exception types raised by the simulator."""


class IsacError(Exception):
    """Base class for all simulator errors."""


class ConfigError(IsacError, ValueError):
    """Invalid scenario parameters."""


class DomainError(IsacError, ValueError):
    """An argument lies outside the domain of a formula."""


class ShapeError(IsacError, ValueError):
    """Array dimensions are inconsistent."""


class DegenerateError(IsacError, ValueError):
    """A quantity that must be nonzero (pattern, channel, rate) vanished."""


class RankError(IsacError, ValueError):
    """A matrix that must have full rank is (numerically) rank deficient."""


class NumericError(IsacError, ArithmeticError):
    """A solver produced non-finite values."""


class ZeroRateError(DegenerateError):
    """A user rate is zero where a strictly positive rate is required."""
