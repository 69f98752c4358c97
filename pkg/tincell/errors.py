"""Exception hierarchy for tincell."""


class TincellError(Exception):
    """Base class for all tincell errors."""


class DomainError(TincellError, ValueError):
    """A numeric argument lies outside the domain of a function."""


class ConvergenceError(TincellError, ArithmeticError):
    """A numerical procedure ran out of budget before meeting its tolerance.

    Attributes:
        best_estimate: Best value available when the procedure stopped
        error_bound: Estimated absolute error of ``best_estimate``
    """

    def __init__(self, message: str, best_estimate: float, error_bound: float):
        super().__init__(message)
        self.best_estimate = best_estimate
        self.error_bound = error_bound


class DivergenceError(ConvergenceError):
    """Series terms stopped decaying."""


class DegenerateConditioningError(TincellError, ZeroDivisionError):
    """Conditioning on an event whose probability is numerically zero."""


class UnsupportedRegimeError(TincellError, ValueError):
    """An approximation was requested outside the regime it was derived for."""


class ConfigError(TincellError, ValueError):
    """Invalid run configuration.

    Attributes:
        field: Name of the offending configuration key, if known
    """

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field
