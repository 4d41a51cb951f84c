"""Exception types shared across the package."""


class KrflowError(Exception):
    """Base class for all package errors."""


class ConfigError(KrflowError):
    """Invalid grid size, dimension, or run configuration."""


class NotInPotentialSpace(KrflowError):
    """The candidate potential fails the metric positivity test."""


class ExpressionMismatch(KrflowError):
    """Two formulas for the same quantity disagree beyond tolerance."""


class DivergentIntegrand(KrflowError):
    """Endpoint extrapolation of an integrand exceeded the magnitude bound."""


class StepRejected(KrflowError):
    """A flow step left the positive cone; the caller should halve dt."""


class FlowAborted(KrflowError):
    """Adaptive stepping underflowed while trying to restore positivity."""
