"""Exception types raised across the package."""


class ValidationError(ValueError):
    """An input violates a structural invariant (norm, Hermiticity, trace, ...)."""


class DomainError(ValueError):
    """A parameter lies outside the region where a quantity is defined."""


class NumericError(ArithmeticError):
    """A numerical routine failed to produce a trustworthy result."""


class SingularModelError(DomainError):
    """A statistical model is singular at the requested point."""


class ContinuityError(NumericError):
    """Eigenvectors could not be tracked continuously across a finite-difference stencil."""


class ConfigError(ValueError):
    """An experiment configuration is invalid.

    ``field`` names the offending key when there is one.
    """

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field
