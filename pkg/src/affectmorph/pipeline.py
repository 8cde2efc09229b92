"""Per-subject synthesis: apex-to-apex interpolation, neutral-to-apex radial
morphs, chained neutral-to-interpolated-apex morphs, mirroring, and the
affect annotation assembly that goes with them.

The two morph recipes and their annotation rules:

  apex to apex     image = morph(a1, a2, r)
                   intensity = (1-r)*I1 + r*I2, angle = (1-r)*t1 + r*t2
  neutral to apex  image = morph(neutral, apex, r)
                   intensity = r*I_apex, angle = t_apex

Valence/arousal are always recomputed from the new polar pair.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .affect import AffectPoint, Expression, ExpressionAngleTable, Interpolated, Label, TemplateGrid
from .errors import PlanningError, SubjectMismatchError
from .geometry import Triangulation, triangulate
from .landmarks import LandmarkSet, add_boundary_points, mirror
from .morph import interpolate_landmarks, mean_shape, morph

__all__ = [
    "AnnotatedFace",
    "SubjectInput",
    "SynthesisJob",
    "apex_to_apex",
    "neutral_to_apex",
    "plan_expressions",
    "plan_subject",
    "run_subject",
]

log = logging.getLogger(__name__)

_ANGLE_TOL = 1e-9


@dataclass(frozen=True)
class SynthesisJob:
    """One planned output: a template node plus the morph recipe reaching it."""

    subject_id: str
    angle_deg: float
    radial_ratio: float
    apex1: Expression | None
    apex2: Expression | None
    r_apex: float
    r_radial: float
    mirrored: bool = False
    pass_through: bool = False
    intensity_assumed: bool = False

    @property
    def sort_key(self) -> tuple[float, float, bool]:
        return (self.angle_deg, self.radial_ratio, self.mirrored)


@dataclass(frozen=True)
class AnnotatedFace:
    """An aligned face image with landmarks, affect point, and provenance."""

    image: np.ndarray
    landmarks: LandmarkSet
    affect: AffectPoint
    label: Label
    subject_id: str
    provenance: SynthesisJob | str = "original"
    intensity_assumed: bool = False
    degenerate_triangles: int = 0

    def __post_init__(self):
        if (self.affect.intensity == 0.0) != (self.label is Expression.NEUTRAL):
            raise ValueError(
                f"zero intensity and the neutral label must coincide; "
                f"got intensity {self.affect.intensity} with label {self.label}"
            )


@dataclass(frozen=True)
class SubjectInput:
    """One subject's given images: exactly one neutral plus apex expressions."""

    subject_id: str
    neutral: AnnotatedFace
    apexes: tuple[AnnotatedFace, ...]

    def __post_init__(self):
        if self.neutral.label is not Expression.NEUTRAL or not self.neutral.affect.is_neutral:
            raise ValueError("neutral face must carry the neutral label at intensity 0")
        labels = [a.label for a in self.apexes]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate apex labels: {labels}")
        for a in self.apexes:
            if a.label is Expression.NEUTRAL:
                raise ValueError("neutral cannot appear among the apexes")
            if not 0.0 < a.affect.intensity <= 1.0:
                raise ValueError(f"apex {a.label} intensity must lie in (0, 1]")
        angles = [a.affect.angle_deg for a in self.apexes]
        if any(b <= a for a, b in zip(angles, angles[1:])):
            raise ValueError("apexes must be sorted by strictly ascending angle")

    def apex_by_label(self, label: Expression) -> AnnotatedFace:
        for a in self.apexes:
            if a.label is label:
                return a
        raise KeyError(label)


def _augmented(face: AnnotatedFace) -> np.ndarray:
    return add_boundary_points(face.landmarks).points


def _check_same_subject(a: AnnotatedFace, b: AnnotatedFace) -> None:
    if a.subject_id != b.subject_id:
        raise SubjectMismatchError(
            f"cannot morph across subjects: {a.subject_id!r} vs {b.subject_id!r}"
        )
    if (
        a.landmarks.image_width != b.landmarks.image_width
        or a.landmarks.image_height != b.landmarks.image_height
    ):
        raise ValueError("faces sit on different canvases; align them first")


def pair_triangulation(a: AnnotatedFace, b: AnnotatedFace) -> Triangulation:
    """Shared triangulation for a morph pair: Delaunay over the boundary-augmented
    mean of the two landmark sets."""
    return triangulate(mean_shape(_augmented(a), _augmented(b)))


def apex_to_apex(
    a1: AnnotatedFace,
    a2: AnnotatedFace,
    r: float,
    tri: Triangulation | None = None,
    fill=(128, 128, 128),
    provenance: SynthesisJob | str = "synthesized",
) -> AnnotatedFace:
    """New expression variation between two apexes of the same subject."""
    _check_same_subject(a1, a2)
    t1, t2 = a1.affect.angle_deg, a2.affect.angle_deg
    if not t1 < t2:
        raise ValueError(f"apex angles must be ascending, got {t1} and {t2}")

    result = morph(a1.image, _augmented(a1), a2.image, _augmented(a2), r, tri=tri, fill=fill)
    facial = result.landmarks[: len(a1.landmarks)]

    intensity = (1.0 - r) * a1.affect.intensity + r * a2.affect.intensity
    angle = (1.0 - r) * t1 + r * t2
    return AnnotatedFace(
        image=result.image,
        landmarks=a1.landmarks.with_points(facial),
        affect=AffectPoint.from_polar(intensity, angle),
        label=Interpolated(angle),
        subject_id=a1.subject_id,
        provenance=provenance,
        intensity_assumed=a1.intensity_assumed or a2.intensity_assumed,
        degenerate_triangles=result.degenerate_triangles,
    )


def neutral_to_apex(
    neutral: AnnotatedFace,
    apex: AnnotatedFace,
    r: float,
    tri: Triangulation | None = None,
    fill=(128, 128, 128),
    provenance: SynthesisJob | str = "synthesized",
) -> AnnotatedFace:
    """Intensity variation of an apex (given or interpolated) along its angle."""
    _check_same_subject(neutral, apex)
    if not neutral.affect.is_neutral:
        raise ValueError("first argument must be the neutral face")

    result = morph(
        neutral.image, _augmented(neutral), apex.image, _augmented(apex), r, tri=tri, fill=fill
    )
    facial = result.landmarks[: len(neutral.landmarks)]

    if r == 0.0:
        affect = AffectPoint.neutral()
        label: Label = Expression.NEUTRAL
    else:
        affect = AffectPoint.from_polar(r * apex.affect.intensity, apex.affect.angle_deg)
        label = apex.label
    return AnnotatedFace(
        image=result.image,
        landmarks=neutral.landmarks.with_points(facial),
        affect=affect,
        label=label,
        subject_id=neutral.subject_id,
        provenance=provenance,
        intensity_assumed=apex.intensity_assumed,
        degenerate_triangles=result.degenerate_triangles,
    )


def plan_expressions(
    subject_id: str,
    apexes: list[tuple[Expression, bool]],
    grid: TemplateGrid,
    mirrored: bool = False,
    table: ExpressionAngleTable | None = None,
) -> list[SynthesisJob]:
    """Expand the template grid into per-output synthesis jobs.

    apexes lists the subject's available apex expressions with their
    intensity-assumed flags; image data never enters planning, so predicted
    counts can be reported without touching pixels.

    Grid angles outside the configured table span are a configuration error;
    angles unreachable because this subject lacks an apex are skipped with a
    warning (no extrapolation, no cross-subject borrowing). Grid points that
    coincide with given images become pass-through jobs.
    """
    table = table or ExpressionAngleTable()
    if grid.angles and (
        grid.angles[0] < table.min_angle - _ANGLE_TOL
        or grid.angles[-1] > table.max_angle + _ANGLE_TOL
    ):
        raise PlanningError(
            f"grid angles [{grid.angles[0]}, {grid.angles[-1]}] extend beyond the "
            f"apex span [{table.min_angle}, {table.max_angle}]; no extrapolation"
        )

    have = sorted((table.angle_of(label), label, assumed) for label, assumed in apexes)
    missing = [
        table.angle_of(label)
        for label in table.angles
        if all(label is not got for _, got, _ in have)
    ]

    jobs: list[SynthesisJob] = []
    if grid.includes_neutral:
        jobs.append(
            SynthesisJob(
                subject_id=subject_id,
                angle_deg=0.0,
                radial_ratio=0.0,
                apex1=None,
                apex2=None,
                r_apex=0.0,
                r_radial=0.0,
                pass_through=True,
            )
        )

    skipped = 0
    for theta in grid.angles:
        recipe = _bracket(theta, have, missing)
        if recipe is None:
            skipped += 1
            continue
        (label1, assumed1), pair2, r_apex = recipe
        assumed = assumed1 or (pair2 is not None and pair2[1])
        for ratio in grid.ratios:
            jobs.append(
                SynthesisJob(
                    subject_id=subject_id,
                    angle_deg=theta,
                    radial_ratio=ratio,
                    apex1=label1,
                    apex2=pair2[0] if pair2 is not None else None,
                    r_apex=r_apex,
                    r_radial=ratio,
                    pass_through=pair2 is None and ratio == 1.0,
                    intensity_assumed=assumed,
                )
            )
    if skipped:
        log.warning(
            "subject %s: %d grid angle(s) skipped (missing apex expressions)",
            subject_id,
            skipped,
        )

    if mirrored:
        jobs.extend(replace(j, mirrored=True) for j in list(jobs))
    jobs.sort(key=lambda j: j.sort_key)
    return jobs


def plan_subject(
    subject: SubjectInput,
    grid: TemplateGrid,
    mirrored: bool = False,
    table: ExpressionAngleTable | None = None,
) -> list[SynthesisJob]:
    """plan_expressions over a loaded subject's available apex labels."""
    table = table or ExpressionAngleTable()
    for face in subject.apexes:
        expected = table.angle_of(face.label)
        if abs(face.affect.angle_deg - expected) > _ANGLE_TOL:
            raise PlanningError(
                f"apex {face.label} sits at {face.affect.angle_deg} deg but the "
                f"angle table says {expected} deg"
            )
    return plan_expressions(
        subject.subject_id,
        [(a.label, a.intensity_assumed) for a in subject.apexes],
        grid,
        mirrored,
        table,
    )


def _bracket(theta, have, missing):
    """Available apex pair bracketing a grid angle, or None when the angle is
    unreachable for this subject (outside its span or spanning a missing apex)."""
    for angle, label, assumed in have:
        if abs(theta - angle) <= _ANGLE_TOL:
            return (label, assumed), None, 0.0
    for (a1, l1, s1), (a2, l2, s2) in zip(have, have[1:]):
        if a1 < theta < a2:
            if any(a1 < m < a2 for m in missing):
                return None
            return (l1, s1), (l2, s2), (theta - a1) / (a2 - a1)
    return None


def run_subject(
    subject: SubjectInput,
    jobs: list[SynthesisJob],
    fill=(128, 128, 128),
    flip_permutation: tuple[int, ...] | None = None,
    use_cache: bool = True,
) -> list[AnnotatedFace]:
    """Materialize every job: build each angle's apex once (cached), morph the
    radial ladder off the neutral, mirror finished results, sort for output."""
    apex_cache: dict[float, AnnotatedFace] = {}
    tri_cache: dict[float, Triangulation] = {}

    def apex_at(job: SynthesisJob) -> AnnotatedFace:
        if use_cache and job.angle_deg in apex_cache:
            return apex_cache[job.angle_deg]
        face1 = subject.apex_by_label(job.apex1)
        if job.apex2 is None:
            apex = face1
        else:
            face2 = subject.apex_by_label(job.apex2)
            apex = apex_to_apex(face1, face2, job.r_apex, fill=fill, provenance=job)
        if use_cache:
            apex_cache[job.angle_deg] = apex
        return apex

    def radial_tri(job: SynthesisJob, apex: AnnotatedFace) -> Triangulation:
        if use_cache and job.angle_deg in tri_cache:
            return tri_cache[job.angle_deg]
        tri = pair_triangulation(subject.neutral, apex)
        if use_cache:
            tri_cache[job.angle_deg] = tri
        return tri

    results: list[tuple[tuple, AnnotatedFace]] = []
    for job in jobs:
        try:
            face = _run_job(subject, job, apex_at, radial_tri, fill)
            if job.mirrored:
                img, lm = mirror(face.image, face.landmarks, flip_permutation)
                face = replace(face, image=img, landmarks=lm, provenance=job)
            results.append((job.sort_key, face))
        except Exception as exc:
            raise RuntimeError(
                f"subject {subject.subject_id}: job at angle {job.angle_deg} "
                f"ratio {job.radial_ratio} (mirrored={job.mirrored}) failed"
            ) from exc

    results.sort(key=lambda kv: kv[0])
    return [face for _, face in results]


def _run_job(subject, job, apex_at, radial_tri, fill) -> AnnotatedFace:
    if job.pass_through:
        # Same pixels and landmarks as the given image; the job rides along so
        # output naming and manifest rows know the grid point it occupies.
        face = subject.neutral if job.apex1 is None else subject.apex_by_label(job.apex1)
        return replace(face, provenance=job)
    apex = apex_at(job)
    if job.r_radial == 1.0 and job.apex2 is not None:
        # The fully interpolated apex is itself the output at ratio 1.0.
        return replace(apex, provenance=job)
    tri = radial_tri(job, apex)
    return neutral_to_apex(
        subject.neutral, apex, job.r_radial, tri=tri, fill=fill, provenance=job
    )
