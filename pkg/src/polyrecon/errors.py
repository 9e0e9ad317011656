"""Shared exception types for the reconstruction pipeline."""


class PolyreconError(Exception):
    """Base class for all pipeline errors."""


class NotBoundedError(PolyreconError):
    """Halfspace intersection is empty or unbounded."""


class NotSimpleError(PolyreconError):
    """A vertex is tight on more than d facets / has the wrong degree."""


class GenerationError(PolyreconError):
    """Random polytope generation exhausted its retry budget."""


class DegenerateDirectionError(PolyreconError):
    """A denominator <w_k(v), z> vanishes; the direction must be resampled."""


class RecoveryError(PolyreconError):
    """Hankel/Prony or root extraction could not produce projections."""


class IllConditionedError(PolyreconError):
    """The Pade linear system is singular or too ill-conditioned."""

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class AlignmentError(PolyreconError):
    """Per-plane projections onto z_re disagree beyond tolerance."""


class ReconstructionError(PolyreconError):
    """End-to-end reconstruction failed after exhausting retries."""

    def __init__(self, message, trail=None):
        super().__init__(message)
        self.trail = trail or []
