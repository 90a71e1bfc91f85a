"""Exception hierarchy shared by every module of the toolkit."""

from __future__ import annotations


class ResumError(Exception):
    """Base class for all toolkit errors."""


class PreconditionError(ResumError, ValueError):
    """An argument violates the operation's documented precondition."""


class SeriesOverflowError(ResumError, OverflowError):
    """A factorial-sized coefficient no longer fits in a double."""


class OffsetError(PreconditionError):
    """Series offsets are incompatible with the requested operation."""


class DomainError(PreconditionError):
    """The Laplace/exponential integral does not converge for this argument."""


class AccuracyError(ResumError):
    """Refinement did not reach the requested tolerance.

    ``best`` carries the best available estimate and ``err`` its error.
    """

    def __init__(self, message: str, best: complex, err: float):
        super().__init__(message)
        self.best = best
        self.err = err


class PoleOnRayError(ResumError):
    """The Borel-plane integrand is not finite on the integration ray."""


class PathError(PreconditionError):
    """An integration path comes too close to a singular point."""


class StiffnessError(ResumError):
    """The adaptive ODE step size underflowed."""


class DegenerateOrderError(ResumError):
    """The Padé linear system is singular or badly conditioned."""


class StokesError(ResumError):
    """The requested direction is too close to an exceptional direction."""


class ConfigurationError(PreconditionError):
    """Rays do not bracket exactly one exceptional direction."""


class SummabilityError(ResumError):
    """The series is not Borel summable along the requested ray."""


class ResonanceError(ResumError):
    """The local recurrence at the left singular point hits a zero divisor.

    ``order`` is the resonant index n with 2 n sqrt(eps) = 1.
    """

    def __init__(self, message: str, order: int):
        super().__init__(message)
        self.order = order


class BranchError(ResumError):
    """Connection-coefficient least squares misfit is too large."""
