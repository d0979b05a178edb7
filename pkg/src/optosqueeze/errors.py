"""Exception types raised across the toolkit."""


class OptoSqueezeError(Exception):
    """Base class for all toolkit errors."""


class NonConvergence(OptoSqueezeError):
    pass


class SingularDetuning(OptoSqueezeError, ValueError):
    pass


class InvalidRatio(OptoSqueezeError, ValueError):
    pass


class DimensionMismatch(OptoSqueezeError, ValueError):
    pass


class NonFiniteResult(OptoSqueezeError, ArithmeticError):
    pass


class Unstable(OptoSqueezeError):
    """Drift matrix is not Hurwitz, so no steady state exists."""


class StabilityPole(OptoSqueezeError, ZeroDivisionError):
    pass


class InvalidRegime(OptoSqueezeError, ValueError):
    pass


class DegenerateCoupling(OptoSqueezeError, ValueError):
    pass


class AmbiguousTracking(OptoSqueezeError):
    pass


class NoSplittingFound(OptoSqueezeError):
    pass


class NonPositiveVariance(OptoSqueezeError, ValueError):
    pass


class ZeroReference(OptoSqueezeError, ZeroDivisionError):
    pass


class UnknownFigure(OptoSqueezeError, KeyError):
    pass


class ConfigError(OptoSqueezeError, ValueError):
    pass


class DegenerateAngleWarning(UserWarning):
    """Optimal quadrature angle is undefined; a default was returned."""
