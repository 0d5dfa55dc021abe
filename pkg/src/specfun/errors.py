"""Exception hierarchy.

Precondition failures (bad input, wrong domain) and numerical failures
(truncation, ill-conditioning, contours hitting poles) are kept apart so the
CLI can map them to different exit codes.
"""


class SpecfunError(Exception):
    """Base class for all errors raised by this package."""


class PreconditionError(SpecfunError):
    """An input violates a documented precondition."""


class ConfigError(PreconditionError):
    """Invalid or inconsistent configuration parameters."""


class DomainError(PreconditionError):
    """Operation called on a function over the wrong domain (line vs half-line)."""


class SpanError(PreconditionError):
    """Tabulated data does not cover the requested time span."""


class ImaginaryAxisError(PreconditionError):
    """A resolvent was requested at a point on (or too close to) the imaginary axis."""


class NumericalError(SpecfunError):
    """A computation could not reach its accuracy target."""


class TruncationError(NumericalError):
    """The truncation horizon is too short for the requested tail tolerance."""


class ResolutionError(NumericalError):
    """Frequencies are closer than the sampling window can resolve."""


class ContourError(NumericalError):
    """A contour passes too close to a known singularity."""


class SolveError(NumericalError):
    """A linear solve was singular or ill-posed."""


class UnboundedWarning(UserWarning):
    """A computed solution exceeded the overflow guard."""
