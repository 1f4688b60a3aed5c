"""Exception hierarchy shared across the package."""


class BetaPerturbError(Exception):
    """Base class for all package errors."""


class DomainError(BetaPerturbError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class SizeError(DomainError):
    """Matrix or polynomial has an unsupported size."""


class NumericError(BetaPerturbError, ArithmeticError):
    """An iterative kernel failed to converge.

    ``best`` holds the last iterate when one is available.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class ConditioningError(NumericError):
    """Input is too ill-conditioned for the requested computation."""


class SingularityError(DomainError):
    """Density evaluated on a measure-zero singular set."""


class ConsistencyError(BetaPerturbError):
    """Recovered quantities violate an identity they must satisfy."""


class ConfigurationError(BetaPerturbError, ValueError):
    """Invalid user supplied configuration (scale law, run config, ...)."""


class ParseError(BetaPerturbError, ValueError):
    """Malformed input record; ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line
