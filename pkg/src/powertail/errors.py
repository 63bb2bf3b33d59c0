"""Exception hierarchy shared by every powertail module."""


class PowertailError(Exception):
    """Base class for all errors raised by powertail."""


class DomainError(PowertailError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class RangeError(PowertailError, ArithmeticError):
    """A result would overflow or underflow the representable range."""


class AccuracyError(PowertailError, ArithmeticError):
    """Quadrature could not reach the requested tolerance.

    Attributes
    ----------
    estimate : float or ndarray
        Best value obtained before giving up.
    error : float
        Last observed change between successive refinements.
    """

    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class ConfigurationError(PowertailError, ValueError):
    """Settings are inconsistent or too coarse for the requested computation."""


class DataError(PowertailError, ValueError):
    """Input data is malformed or insufficient."""
