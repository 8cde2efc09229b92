"""Polar circumplex geometry: expression angles, valence/arousal math, and
the sampling template that fixes how many images get synthesized per subject.

Affect coordinates live on the unit disc: an expression is a polar pair
(intensity, angle) with valence = I*cos(theta) and arousal = I*sin(theta).
Angles are kept in degrees everywhere and converted to radians only inside
trig calls, so lattice angles like 10 + k*15 stay exact.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .errors import ConfigurationError, DomainError

__all__ = [
    "Expression",
    "Interpolated",
    "APEX_ORDER",
    "DEFAULT_ANGLES",
    "ExpressionAngleTable",
    "AffectPoint",
    "TemplateGrid",
    "va_from_polar",
    "polar_from_va",
    "build_template",
    "augmentation_factor",
]

_COUPLING_TOL = 1e-9


class Expression(enum.Enum):
    """The seven categorical expressions found in lab-collected datasets."""

    NEUTRAL = "neutral"
    HAPPY = "happy"
    SURPRISED = "surprised"
    AFRAID = "afraid"
    ANGRY = "angry"
    DISGUSTED = "disgusted"
    SAD = "sad"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Interpolated:
    """Label for a synthesized expression at an intermediate circumplex angle."""

    angle_deg: float

    def __post_init__(self):
        if not (0.0 <= self.angle_deg < 360.0):
            raise DomainError(f"interpolated angle {self.angle_deg} outside [0, 360)")

    def __str__(self) -> str:
        return "interpolated"


# A label is either one of the seven categorical expressions or an
# interpolated angle between two apexes.
Label = Expression | Interpolated

# Apex expressions ordered by ascending circumplex angle.
APEX_ORDER = (
    Expression.HAPPY,
    Expression.SURPRISED,
    Expression.AFRAID,
    Expression.ANGRY,
    Expression.DISGUSTED,
    Expression.SAD,
)

# Happy and Sad anchor the span; the four intermediates are configurable
# defaults chosen on the 15-degree lattice, preserving the apex ordering.
DEFAULT_ANGLES = {
    Expression.HAPPY: 10.0,
    Expression.SURPRISED: 70.0,
    Expression.AFRAID: 100.0,
    Expression.ANGRY: 130.0,
    Expression.DISGUSTED: 160.0,
    Expression.SAD: 205.0,
}


@dataclass(frozen=True)
class ExpressionAngleTable:
    """Mapping from apex expression to its circumplex angle in degrees.

    Neutral never appears: at intensity zero its angle is undefined.
    """

    angles: dict[Expression, float] = field(default_factory=lambda: dict(DEFAULT_ANGLES))

    def __post_init__(self):
        missing = [e for e in APEX_ORDER if e not in self.angles]
        if missing:
            raise ConfigurationError(f"angle table missing entries for {missing}")
        if Expression.NEUTRAL in self.angles:
            raise ConfigurationError("neutral has no angle entry (intensity 0)")
        vals = [self.angles[e] for e in APEX_ORDER]
        for v, e in zip(vals, APEX_ORDER):
            if not (0.0 <= v < 360.0):
                raise ConfigurationError(f"angle for {e} must lie in [0, 360), got {v}")
        for (e1, v1), (e2, v2) in zip(zip(APEX_ORDER, vals), zip(APEX_ORDER[1:], vals[1:])):
            if not v1 < v2:
                raise ConfigurationError(
                    f"apex angles must be strictly increasing: {e1}={v1} !< {e2}={v2}"
                )

    def angle_of(self, label: Expression) -> float:
        if label is Expression.NEUTRAL:
            raise DomainError("neutral has no circumplex angle")
        return self.angles[label]

    @property
    def min_angle(self) -> float:
        return self.angles[APEX_ORDER[0]]

    @property
    def max_angle(self) -> float:
        return self.angles[APEX_ORDER[-1]]


def va_from_polar(intensity: float, angle_deg: float) -> tuple[float, float]:
    """Valence/arousal of an expression at the given intensity and angle."""
    if not (0.0 <= intensity <= 1.0):
        raise DomainError(f"intensity {intensity} outside [0, 1]")
    rad = math.radians(angle_deg)
    return intensity * math.cos(rad), intensity * math.sin(rad)


def polar_from_va(valence: float, arousal: float) -> tuple[float, float]:
    """Inverse of va_from_polar; angle returned in [0, 360), 0 at zero radius."""
    radius = math.hypot(valence, arousal)
    if radius > 1.0 + _COUPLING_TOL:
        raise DomainError(f"(valence, arousal) radius {radius} exceeds 1")
    if radius == 0.0:
        return 0.0, 0.0
    angle = math.degrees(math.atan2(arousal, valence)) % 360.0
    return min(radius, 1.0), angle


@dataclass(frozen=True)
class AffectPoint:
    """Coupled polar and Cartesian affect coordinates of one face image."""

    angle_deg: float
    intensity: float
    valence: float
    arousal: float

    def __post_init__(self):
        if not (0.0 <= self.intensity <= 1.0):
            raise DomainError(f"intensity {self.intensity} outside [0, 1]")
        v, a = va_from_polar(self.intensity, self.angle_deg)
        if abs(v - self.valence) > _COUPLING_TOL or abs(a - self.arousal) > _COUPLING_TOL:
            raise DomainError(
                "valence/arousal inconsistent with polar coordinates: "
                f"({self.valence}, {self.arousal}) vs ({v}, {a})"
            )

    @classmethod
    def from_polar(cls, intensity: float, angle_deg: float) -> "AffectPoint":
        v, a = va_from_polar(intensity, angle_deg)
        return cls(angle_deg=angle_deg, intensity=intensity, valence=v, arousal=a)

    @classmethod
    def from_va(cls, valence: float, arousal: float) -> "AffectPoint":
        intensity, angle = polar_from_va(valence, arousal)
        v, a = va_from_polar(intensity, angle)
        return cls(angle_deg=angle, intensity=intensity, valence=v, arousal=a)

    @classmethod
    def neutral(cls) -> "AffectPoint":
        return cls(angle_deg=0.0, intensity=0.0, valence=0.0, arousal=0.0)

    @property
    def is_neutral(self) -> bool:
        return self.intensity == 0.0


@dataclass(frozen=True)
class TemplateGrid:
    """The lattice of (angle, radial ratio) targets one subject is morphed onto.

    Angles run angle_min, angle_min + step, ..., angle_max; radial ratios run
    step, 2*step, ..., 1.0. Neutral is a single extra point at the center,
    never one per angle.
    """

    angle_min_deg: float
    angle_max_deg: float
    angle_step_deg: float
    radial_step: float
    nodes: tuple[tuple[float, float], ...]
    includes_neutral: bool

    @property
    def angles(self) -> tuple[float, ...]:
        seen = dict.fromkeys(a for a, _ in self.nodes)
        return tuple(seen)

    @property
    def ratios(self) -> tuple[float, ...]:
        seen = dict.fromkeys(r for _, r in self.nodes)
        return tuple(seen)

    @property
    def total_points(self) -> int:
        return len(self.nodes) + (1 if self.includes_neutral else 0)


def build_template(
    angle_min_deg: float,
    angle_max_deg: float,
    angle_step_deg: float,
    radial_step: float,
    include_neutral: bool = True,
) -> TemplateGrid:
    """Construct the sampling template, enforcing exact lattice alignment.

    Divisibility is checked strictly (to 1e-6) instead of silently rounding:
    the per-subject output counts depend on the lattice being exact.
    """
    if angle_step_deg <= 0:
        raise ConfigurationError(f"angle_step_deg must be positive, got {angle_step_deg}")
    if not (0.0 < radial_step <= 1.0):
        raise ConfigurationError(f"radial_step must lie in (0, 1], got {radial_step}")
    if angle_max_deg < angle_min_deg:
        raise ConfigurationError(
            f"angle_max_deg {angle_max_deg} is below angle_min_deg {angle_min_deg}"
        )

    span = angle_max_deg - angle_min_deg
    k = round(span / angle_step_deg)
    if abs(k * angle_step_deg - span) > 1e-6:
        raise ConfigurationError(
            f"angle span {span} is not an integer multiple of angle_step_deg {angle_step_deg}"
        )
    m = round(1.0 / radial_step)
    if abs(m * radial_step - 1.0) > 1e-6:
        raise ConfigurationError(
            f"1.0 is not an integer multiple of radial_step {radial_step}"
        )

    angles = [angle_min_deg + i * angle_step_deg for i in range(k + 1)]
    ratios = [j / m for j in range(1, m + 1)]
    nodes = tuple((a, r) for a in angles for r in ratios)
    return TemplateGrid(
        angle_min_deg=angle_min_deg,
        angle_max_deg=angle_max_deg,
        angle_step_deg=angle_step_deg,
        radial_step=radial_step,
        nodes=nodes,
        includes_neutral=include_neutral,
    )


def augmentation_factor(
    grid: TemplateGrid, given_images_per_subject: int, mirrored: bool
) -> float:
    """Output images per input image: grid total (doubled by mirroring) / given."""
    if given_images_per_subject < 1:
        raise DomainError(
            f"given_images_per_subject must be >= 1, got {given_images_per_subject}"
        )
    total = grid.total_points * (2 if mirrored else 1)
    return total / given_images_per_subject
