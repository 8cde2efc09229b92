"""Exception types shared across the package."""


class AffectMorphError(Exception):
    """Base class for all package errors."""


class DomainError(AffectMorphError, ValueError):
    """A numeric argument is outside its allowed domain."""


class ConfigurationError(AffectMorphError, ValueError):
    """A configuration value violates a precondition; the message names it."""


class SidecarError(AffectMorphError, ValueError):
    """A landmark sidecar file is malformed; the message names the field."""


class AlignmentError(AffectMorphError, ValueError):
    """Eye geometry is unusable for alignment (degenerate or mirrored)."""


class TriangulationError(AffectMorphError, ValueError):
    """The point set cannot be triangulated (collinear or duplicated points)."""


class PlanningError(AffectMorphError, ValueError):
    """The synthesis template cannot be realized for the configured expressions."""


class SubjectMismatchError(AffectMorphError, ValueError):
    """Two faces from different subjects were passed to a same-subject morph."""


class ManifestError(AffectMorphError, ValueError):
    """A manifest file cannot be read or fails validation."""
