"""
Exception hierarchy for the singularity toolkit.
All errors derive from ValueError so callers treating bad input generically keep working.
"""
from typing import Optional


class SingularityError(ValueError):
    """Base class for every error raised by the toolkit."""


class SeriesError(SingularityError):
    """Invalid truncated-series operation (orders, constant terms, lead exponents)."""


class MobiusError(SingularityError):
    """Degenerate or wrongly shaped Möbius transformation."""


class DomainError(SingularityError):
    """A point lies outside the domain where an object is defined."""


class ContinuationError(SingularityError):
    """Analytic continuation around the puncture could not be tracked."""


class MonodromyFitError(SingularityError):
    """The continued values are not related by a single Möbius transformation."""


class ClassificationError(SingularityError):
    """The classification pipeline rejected its input."""


class HyperbolicMonodromyError(ClassificationError):
    """Monodromy is hyperbolic, impossible for a hyperbolic metric near a puncture."""


class NegativeTranslationError(ClassificationError):
    """Parabolic monodromy translates in the excluded negative direction."""


class InconsistentInputError(ClassificationError):
    """Periodic part has pole or essential behaviour at the puncture."""


class VerificationFailed(SingularityError):
    """An oracle check exceeded its tolerance."""

    def __init__(self, name: str, residual: float, tolerance: Optional[float] = None):
        self.name = name
        self.residual = residual
        self.tolerance = tolerance
        message = f"{name}: residual {residual:.3e}"
        if tolerance is not None:
            message += f" exceeds tolerance {tolerance:.3e}"
        super().__init__(message)
