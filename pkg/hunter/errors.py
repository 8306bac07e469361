"""Exception hierarchy. Each family carries the exit code the CLI reports."""
from typing import Optional, Tuple


class HunterError(Exception):
    """Base class for every failure raised by the package."""
    exit_code = 2


# ============ USAGE / DATA ============

class UsageError(HunterError):
    """Bad command-line or configuration input."""
    exit_code = 64


class DataFormatError(HunterError):
    """Malformed profile file."""
    exit_code = 65


# ============ NUMERICAL FAILURES ============

class NumericalError(HunterError):
    """A numerical construction could not be completed."""
    exit_code = 2


class DomainError(NumericalError):
    """Evaluation outside the admissible domain (y <= 0, rho <= 0, out of range)."""


class SonicDegeneracy(NumericalError):
    """The coefficient determinant (u+y)^2 - 1 is inside the sonic guard."""


class StepSizeUnderflow(NumericalError):
    """The integrator step collapsed, usually near an unguarded singularity."""


class MaxStepsExceeded(NumericalError):
    """The integrator hit its step budget."""


class NoSignChange(NumericalError):
    """A bracketing root finder was handed an interval without a sign change."""


class IllConditioned(NumericalError):
    """A least-squares fit has too little data or span to be trusted."""


class QuadratureFailure(NumericalError):
    """A quadrature did not meet its accuracy target."""


class NodePassingFailure(NumericalError):
    """Continuation of v2 through a zero of v1 lost Wronskian accuracy."""


class PoleAtC(NumericalError):
    """2F1 requested with c a nonpositive integer."""


class SlowConvergence(NumericalError):
    """A series did not converge within its term budget."""


class PoleAtNonpositiveInteger(NumericalError):
    """Gamma function requested at a pole."""


class ResonantOrder(NumericalError):
    """The order-n linear system of a local expansion is singular."""

    def __init__(self, message: str, order: int, y_star: float):
        super().__init__(message)
        self.order = order
        self.y_star = y_star


class InsufficientSeparation(NumericalError):
    """Two nearby solutions did not separate enough to measure an exponent."""


class DegenerateExponent(NumericalError):
    """Frobenius exponents coincide (y* = 1)."""


class SonicGuardHit(NumericalError):
    """A second sonic approach occurred inside an integration range."""


class VelocityBoundViolated(NumericalError):
    """An exterior or interior velocity bound failed."""


class SeamMismatch(NumericalError):
    """Interior and exterior traces differ at y0 beyond the match tolerance."""


class CountMismatch(NumericalError):
    """A glued profile has the wrong number of intersections or sonic points."""


class ResidualTooLarge(NumericalError):
    """A glued profile does not satisfy the ODE to the residual tolerance."""


class OriginSeriesFailure(NumericalError):
    """The origin series could not be launched."""


class BlowupBeforeY0(NumericalError):
    """The interior solution left the admissible region before reaching y0."""


class TailUncertain(NumericalError):
    """The intersection count beyond y_max could not be certified."""


# ============ ROOT SEARCH FAILURES ============

class NoRootError(HunterError):
    """A root search found nothing."""
    exit_code = 3


class NoBracket(NoRootError):
    """No sign change on the scanned interval."""

    def __init__(
        self,
        message: str,
        predicted: Optional[float] = None,
        interval: Optional[Tuple[float, float]] = None,
    ):
        super().__init__(message)
        self.predicted = predicted
        self.interval = interval


class PrecisionFloor(NoRootError):
    """Requested lambda is below what double precision can resolve."""

    def __init__(self, message: str, lam: Optional[float] = None):
        super().__init__(message)
        self.lam = lam
