"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class DegenerateEvaluationError(ArithmeticError):
    """A numerically degenerate evaluation (e.g. a pole of a Moebius map)."""


class NotUnimodularError(ValueError):
    """Matrix entries do not have determinant close to one."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""


class ConfigError(ValueError):
    """Malformed or unresolvable experiment configuration."""
