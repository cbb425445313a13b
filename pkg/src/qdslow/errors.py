"""Exception hierarchy shared by the numerical modules and the CLI."""


class QDSlowError(Exception):
    """Base class for all package errors."""


class DomainError(QDSlowError, ValueError):
    """An argument lies outside the domain of the function."""


class ConfigError(QDSlowError, ValueError):
    """Invalid scenario configuration (field-level message)."""


class ShapeError(QDSlowError, ValueError):
    """A spectrum does not have the shape a metric requires (e.g. no EIT doublet)."""


class NumericalError(QDSlowError, ArithmeticError):
    """A numerical procedure failed to reach its tolerance.

    ``residual`` carries the achieved error estimate when one is available.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class DivergenceError(NumericalError):
    """Occupation divergence, non-finite state, or divergent extrapolation."""


class SingularityError(NumericalError):
    """A linear system or rational expression is singular."""


class StiffnessError(NumericalError):
    """An adaptive integrator's step size underflowed."""
