"""Structured errors shared across the package."""


class MaslovkitError(Exception):
    """Base class for all structured errors raised by this package."""


class DimensionMismatchError(MaslovkitError):
    """Inputs have incompatible or invalid dimensions."""


class DegenerateFrameError(MaslovkitError):
    """A frame is rank deficient or violates the isotropy tolerance."""


class NonTransverseError(MaslovkitError):
    """An operation required transverse subspaces but got intersecting ones."""


class IrregularCrossingError(MaslovkitError):
    """A crossing form is degenerate on the intersection.

    Carries the crossing time; the caller should perturb the path (or split
    the domain away from the offending time) and retry.
    """

    def __init__(self, time, message=None):
        self.time = time
        super().__init__(
            message
            or f"irregular crossing at t={time!r}: crossing form is degenerate "
            "on the intersection; perturb the path or split the domain near "
            "this time and retry"
        )


class EndpointMismatchError(MaslovkitError):
    """A loop's endpoints do not span the same subspace."""


class KinkEvaluationError(MaslovkitError):
    """A profile was evaluated exactly at a kink without a side selection."""


class SpectrumSearchError(MaslovkitError):
    """No admissible slope exists within the search range."""


class ProfileConstraintError(MaslovkitError):
    """A profile precondition failed.  ``violated`` names the inequality."""

    def __init__(self, violated, message=None):
        self.violated = violated
        super().__init__(message or violated)


class NotAChordLevelError(MaslovkitError):
    """The rotation angle is not an integer multiple of a half turn."""


class IntegrationError(MaslovkitError):
    """Fixed-step integration failed (underflow, blow-up, or non-finite data)."""


class IncoherentSystemError(MaslovkitError):
    """Transition maps of a directed system fail composition coherence."""


class ShapeMismatchError(MaslovkitError):
    """Chain maps or complexes have incompatible shapes."""
