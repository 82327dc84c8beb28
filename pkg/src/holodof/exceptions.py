"""Exception types raised by holodof."""


class HolodofError(Exception):
    """Base class for all library errors."""


class InvalidArgumentError(HolodofError, ValueError):
    """An argument is outside the domain of the operation."""


class EvanescentRegionError(InvalidArgumentError):
    """A wavenumber point lies outside the propagating disk."""


class NumericalFailureError(HolodofError, ArithmeticError):
    """A numerical routine did not reach its accuracy target.

    Parameters
    ----------
    message : str
        Human readable description.
    estimate : float, optional
        Achieved error estimate (quadrature) or a diagnostic quantity
        (eigen-solver residual, condition estimate).
    """

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class ConfigError(HolodofError, ValueError):
    """A scenario configuration is malformed or out of range.

    ``field`` and ``line`` locate the offending entry when known.
    """

    def __init__(self, message, field=None, line=None):
        where = []
        if field is not None:
            where.append(f"field '{field}'")
        if line is not None:
            where.append(f"line {line}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.field = field
        self.line = line
