"""Exception types shared across the package."""


class LifespanError(Exception):
    """Base class for all errors raised by lifespan."""


class DomainError(LifespanError, ValueError):
    """An argument lies outside the domain of the function."""


class InvalidModelError(LifespanError, ValueError):
    """A model variant was passed to an operation that cannot use it."""


class ConvergenceError(LifespanError, ArithmeticError):
    """A numerical routine did not reach its tolerance.

    Attributes:
        estimate: best value obtained before giving up.
        error: estimated absolute error of ``estimate``.
    """

    def __init__(self, message, estimate=float("nan"), error=float("inf")):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class ConfigError(LifespanError, ValueError):
    """A scenario configuration failed to parse or validate."""
