"""Balanced valence-arousal dataset synthesis via landmark-based face morphing.

Turns a small per-subject set of categorical expression images (neutral plus
apex expressions, each with a 68-point landmark sidecar) into a dense,
balanced grid of synthetic faces over the valence-arousal circumplex, every
output carrying deterministic continuous affect annotations.
"""

from .affect import (
    AffectPoint,
    DEFAULT_ANGLES,
    Expression,
    ExpressionAngleTable,
    Interpolated,
    TemplateGrid,
    augmentation_factor,
    build_template,
    polar_from_va,
    va_from_polar,
)
from .geometry import Triangulation, triangulate
from .landmarks import (
    CanonicalFrame,
    LandmarkSet,
    add_boundary_points,
    align_to_canonical,
    eye_centers,
    mirror,
    parse_landmarks,
    serialize_landmarks,
)
from .morph import MorphResult, interpolate_landmarks, morph
from .pipeline import (
    AnnotatedFace,
    SubjectInput,
    SynthesisJob,
    apex_to_apex,
    neutral_to_apex,
    plan_expressions,
    plan_subject,
    run_subject,
)
from .warp import piecewise_warp

__version__ = "0.1.0"

__all__ = [
    "AffectPoint",
    "AnnotatedFace",
    "CanonicalFrame",
    "DEFAULT_ANGLES",
    "Expression",
    "ExpressionAngleTable",
    "Interpolated",
    "LandmarkSet",
    "MorphResult",
    "SubjectInput",
    "SynthesisJob",
    "TemplateGrid",
    "Triangulation",
    "add_boundary_points",
    "align_to_canonical",
    "apex_to_apex",
    "augmentation_factor",
    "build_template",
    "eye_centers",
    "interpolate_landmarks",
    "mirror",
    "morph",
    "neutral_to_apex",
    "parse_landmarks",
    "piecewise_warp",
    "plan_expressions",
    "plan_subject",
    "polar_from_va",
    "run_subject",
    "serialize_landmarks",
    "triangulate",
    "va_from_polar",
]
