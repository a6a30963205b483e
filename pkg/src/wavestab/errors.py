"""Exception hierarchy.

Every failure raised by the library derives from :class:`WavestabError`.
The two intermediate classes split configuration problems from numerical
ones so the command line can map them onto distinct exit codes.
"""

from __future__ import annotations


class WavestabError(Exception):
    """Base class; ``details`` carries machine-readable context."""

    exit_code = 3

    def __init__(self, message: str = "", **details):
        super().__init__(message)
        self.details = details

    def to_dict(self) -> dict:
        return {"error": type(self).__name__, "message": str(self), "details": self.details}


class ConfigurationError(WavestabError):
    exit_code = 2


class NumericalError(WavestabError):
    exit_code = 3


# model
class KappaNotPositive(ConfigurationError):
    pass


class EmptyCoefficients(ConfigurationError):
    pass


class OrderTooHigh(ConfigurationError):
    pass


# profile
class NonpositiveRho(NumericalError):
    pass


class NoWellFound(NumericalError):
    pass


class DegenerateWell(NumericalError):
    pass


class NoDualPoint(NumericalError):
    pass


class QuadratureNotConverged(NumericalError):
    pass


# action
class BoundaryTooClose(NumericalError):
    pass


class NoiseFloor(NumericalError):
    pass


class ZeroPeriodDerivative(NumericalError):
    pass


# spectral
class ModelRangeExceeded(NumericalError):
    pass


class IntegratorFailed(NumericalError):
    pass


class RootOnContour(NumericalError):
    pass


class DiskCaptureFailed(NumericalError):
    pass


# modulation
class SingularityNotSpurious(NumericalError):
    pass


class SingularHessian(NumericalError):
    pass


# asymptotics
class NotAMinimum(NumericalError):
    """Raised off the small-amplitude side; ``details['d2W']`` holds the curvature."""


class NoSolitaryWave(NumericalError):
    pass


# madelung
class VanishingModulus(NumericalError):
    pass
