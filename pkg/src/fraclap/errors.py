"""Exception types shared across the library."""


class ArgumentError(ValueError):
    """A parameter is outside the range an operation supports."""


class SupportError(ValueError):
    """Declared support of a grid function violates an operation's precondition."""


class SmoothnessError(ValueError):
    """Input fails the spectral-decay smoothness screen."""


class DomainError(Exception):
    """Input lies outside the quadratic form's domain (e.g. the mean-zero rule)."""


class FormDivergence(ArithmeticError):
    """A spectral or quadrature tail does not converge at the requested order."""


class SolverError(RuntimeError):
    """A linear solve failed to produce a usable field."""


class ConfigError(ValueError):
    """Invalid run configuration."""
