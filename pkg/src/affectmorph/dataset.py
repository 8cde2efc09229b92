"""Input discovery, pipeline configuration, image codec handling, manifest
emission, and the output directory layout.

Input layout (all names case-insensitive on the expression token):

    in/<subject_id>/<expression>.png
    in/<subject_id>/<expression>.landmarks.json
    in/<subject_id>/intensity.json            # optional, label -> (0, 1]

Output layout:

    out/<subject_id>/<angle>_<ratio>[_m].png  # e.g. 010.0_0.50_m.png
    out/manifest.csv
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from PIL import Image

from .affect import (
    AffectPoint,
    DEFAULT_ANGLES,
    Expression,
    ExpressionAngleTable,
    TemplateGrid,
    build_template,
)
from .errors import ConfigurationError, ManifestError, SidecarError
from .landmarks import CanonicalFrame, align_to_canonical, parse_landmarks
from .pipeline import AnnotatedFace, SubjectInput, SynthesisJob, plan_expressions, run_subject

__all__ = [
    "PipelineConfig",
    "SubjectFiles",
    "ApexFiles",
    "ManifestRecord",
    "MANIFEST_HEADER",
    "discover_subjects",
    "load_subject",
    "read_image",
    "write_image",
    "record_for_face",
    "write_manifest",
    "read_manifest",
    "generate_dataset",
    "GenerationSummary",
]

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")
TOKEN_TO_EXPRESSION = {e.value: e for e in Expression}

MANIFEST_HEADER = (
    "subject_id,file,label,angle_deg,intensity,valence,arousal,"
    "apex1,apex2,r_apex,r_radial,mirrored,origin"
)

# Default eye anchors as dyadic fractions of the canvas, so scaled canvases
# keep the anchors exactly symmetric: 176/512, 336/512, 230/512.
_ANCHOR_LX, _ANCHOR_RX, _ANCHOR_Y = 0.34375, 0.65625, 0.44921875


@dataclass(frozen=True)
class PipelineConfig:
    """Validated pipeline settings; every module precondition is checked at
    load time, before any pixel work starts."""

    input_root: str = ""
    output_root: str = ""
    angles: dict = field(default_factory=lambda: dict(DEFAULT_ANGLES))
    angle_min_deg: float = 10.0
    angle_max_deg: float = 205.0
    angle_step_deg: float = 15.0
    radial_step: float = 0.1
    canvas_width: int = 512
    canvas_height: int = 512
    left_eye_anchor: tuple[float, float] | None = None
    right_eye_anchor: tuple[float, float] | None = None
    fill_color: tuple[int, int, int] = (128, 128, 128)
    mirror: bool = False
    landmark_count: int = 68
    flip_permutation: tuple[int, ...] | None = None
    image_format: str = "png"

    def table(self) -> ExpressionAngleTable:
        return ExpressionAngleTable(dict(self.angles))

    def grid(self) -> TemplateGrid:
        return build_template(
            self.angle_min_deg, self.angle_max_deg, self.angle_step_deg, self.radial_step
        )

    def frame(self) -> CanonicalFrame:
        left = self.left_eye_anchor or (
            self.canvas_width * _ANCHOR_LX,
            self.canvas_height * _ANCHOR_Y,
        )
        right = self.right_eye_anchor or (
            self.canvas_width * _ANCHOR_RX,
            self.canvas_height * _ANCHOR_Y,
        )
        return CanonicalFrame(
            canvas_width=self.canvas_width,
            canvas_height=self.canvas_height,
            left_eye_anchor=tuple(left),
            right_eye_anchor=tuple(right),
            fill_color=tuple(self.fill_color),
        )

    def validate(self) -> "PipelineConfig":
        self.table()
        self.grid()
        self.frame()
        if self.landmark_count < 5:
            raise ConfigurationError(
                f"landmark_count must be at least 5, got {self.landmark_count}"
            )
        if self.mirror and self.landmark_count != 68 and self.flip_permutation is None:
            raise ConfigurationError(
                "mirroring a non-68-point layout needs an explicit flip_permutation"
            )
        if self.flip_permutation is not None and sorted(self.flip_permutation) != list(
            range(self.landmark_count)
        ):
            raise ConfigurationError(
                "flip_permutation is not a permutation of the landmark indices"
            )
        if not all(0 <= c <= 255 for c in self.fill_color):
            raise ConfigurationError(f"fill_color {self.fill_color} outside 0..255")
        if self.image_format.lower() != "png":
            raise ConfigurationError(
                "image_format must be 'png'; lossy formats break endpoint fidelity"
            )
        return self

    @classmethod
    def from_json(cls, path: str | Path) -> "PipelineConfig":
        try:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(doc)

    @classmethod
    def from_dict(cls, doc: dict) -> "PipelineConfig":
        if not isinstance(doc, dict):
            raise ConfigurationError("config root must be a JSON object")
        angles = dict(DEFAULT_ANGLES)
        for token, deg in (doc.get("angles") or {}).items():
            expr = TOKEN_TO_EXPRESSION.get(str(token).lower())
            if expr is None or expr is Expression.NEUTRAL:
                raise ConfigurationError(f"angles: unknown apex expression {token!r}")
            angles[expr] = float(deg)
        grid = doc.get("grid") or {}
        frame = doc.get("frame") or {}

        def anchor(key):
            v = frame.get(key)
            return None if v is None else (float(v[0]), float(v[1]))

        cfg = cls(
            input_root=str(doc.get("input_root", "")),
            output_root=str(doc.get("output_root", "")),
            angles=angles,
            angle_min_deg=float(grid.get("angle_min_deg", 10.0)),
            angle_max_deg=float(grid.get("angle_max_deg", 205.0)),
            angle_step_deg=float(grid.get("angle_step_deg", 15.0)),
            radial_step=float(grid.get("radial_step", 0.1)),
            canvas_width=int(frame.get("canvas_width", 512)),
            canvas_height=int(frame.get("canvas_height", 512)),
            left_eye_anchor=anchor("left_eye_anchor"),
            right_eye_anchor=anchor("right_eye_anchor"),
            fill_color=tuple(int(c) for c in frame.get("fill_color", (128, 128, 128))),
            mirror=bool(doc.get("mirror", False)),
            landmark_count=int(doc.get("landmark_count", 68)),
            flip_permutation=(
                tuple(int(i) for i in doc["flip_permutation"])
                if doc.get("flip_permutation") is not None
                else None
            ),
            image_format=str(doc.get("image_format", "png")),
        )
        return cfg.validate()


@dataclass(frozen=True)
class ApexFiles:
    label: Expression
    image: Path
    sidecar: Path
    intensity: float | None


@dataclass(frozen=True)
class SubjectFiles:
    subject_id: str
    neutral_image: Path
    neutral_sidecar: Path
    apexes: tuple[ApexFiles, ...]

    @property
    def labels(self) -> list[Expression]:
        return [a.label for a in self.apexes]


def discover_subjects(
    input_root: str | Path, config: PipelineConfig
) -> tuple[list[SubjectFiles], list[str]]:
    """Scan the input tree: one SubjectFiles per subject directory.

    A subject without a neutral image is skipped with a warning; an expression
    image without its landmark sidecar is a hard error naming the file.
    """
    root = Path(input_root)
    if not root.is_dir():
        raise ConfigurationError(f"input root {root} is not a directory")
    subjects: list[SubjectFiles] = []
    warnings: list[str] = []
    for subject_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        found: dict[Expression, tuple[Path, Path]] = {}
        for img in sorted(subject_dir.iterdir()):
            if img.suffix.lower() not in IMAGE_SUFFIXES:
                continue
            expr = TOKEN_TO_EXPRESSION.get(img.stem.lower())
            if expr is None:
                continue
            sidecar = img.with_name(img.stem + ".landmarks.json")
            if not sidecar.is_file():
                raise SidecarError(f"missing landmark sidecar for {img}")
            if expr in found:
                raise ConfigurationError(
                    f"subject {subject_dir.name}: multiple images for {expr}"
                )
            found[expr] = (img, sidecar)
        if not found:
            continue
        if Expression.NEUTRAL not in found:
            warnings.append(f"subject {subject_dir.name}: no neutral image, skipped")
            continue
        intensities = _read_intensity_file(subject_dir / "intensity.json")
        apexes = tuple(
            ApexFiles(expr, img, sc, intensities.get(expr))
            for expr, (img, sc) in sorted(found.items(), key=lambda kv: kv[0].value)
            if expr is not Expression.NEUTRAL
        )
        neutral_img, neutral_sc = found[Expression.NEUTRAL]
        subjects.append(
            SubjectFiles(
                subject_id=subject_dir.name,
                neutral_image=neutral_img,
                neutral_sidecar=neutral_sc,
                apexes=apexes,
            )
        )
    return subjects, warnings


def _read_intensity_file(path: Path) -> dict[Expression, float]:
    if not path.is_file():
        return {}
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"cannot parse {path}: {exc}") from exc
    out: dict[Expression, float] = {}
    for token, value in doc.items():
        expr = TOKEN_TO_EXPRESSION.get(str(token).lower())
        if expr is None or expr is Expression.NEUTRAL:
            raise ConfigurationError(f"{path}: unknown expression {token!r}")
        value = float(value)
        if not 0.0 < value <= 1.0:
            raise ConfigurationError(
                f"{path}: intensity for {token} must lie in (0, 1], got {value}"
            )
        out[expr] = value
    return out


def read_image(path: str | Path) -> np.ndarray:
    with Image.open(path) as img:
        return np.asarray(img.convert("RGB"))


def write_image(path: str | Path, image: np.ndarray) -> None:
    Image.fromarray(image, mode="RGB").save(path, format="PNG")


def load_subject(files: SubjectFiles, config: PipelineConfig) -> SubjectInput:
    """Read, parse, and eye-align one subject onto the canonical frame."""
    frame = config.frame()
    table = config.table()

    def load_face(img_path: Path, sidecar_path: Path, label, affect, assumed):
        image = read_image(img_path)
        lm = parse_landmarks(sidecar_path.read_bytes(), expected_count=config.landmark_count)
        h, w = image.shape[:2]
        if (lm.image_width, lm.image_height) != (w, h):
            raise SidecarError(
                f"{sidecar_path}: declared size {lm.image_width}x{lm.image_height} "
                f"does not match image {w}x{h}"
            )
        aligned_img, aligned_lm = align_to_canonical(image, lm, frame)
        return AnnotatedFace(
            image=aligned_img,
            landmarks=aligned_lm,
            affect=affect,
            label=label,
            subject_id=files.subject_id,
            provenance="original",
            intensity_assumed=assumed,
        )

    neutral = load_face(
        files.neutral_image,
        files.neutral_sidecar,
        Expression.NEUTRAL,
        AffectPoint.neutral(),
        False,
    )
    apex_faces = []
    for apex in files.apexes:
        intensity = 1.0 if apex.intensity is None else apex.intensity
        affect = AffectPoint.from_polar(intensity, table.angle_of(apex.label))
        apex_faces.append(
            load_face(apex.image, apex.sidecar, apex.label, affect, apex.intensity is None)
        )
    apex_faces.sort(key=lambda f: f.affect.angle_deg)
    return SubjectInput(files.subject_id, neutral, tuple(apex_faces))


@dataclass(frozen=True)
class ManifestRecord:
    """One output row binding a generated file to its labels and morph recipe."""

    subject_id: str
    file: str
    label: str
    angle_deg: float
    intensity: float
    valence: float
    arousal: float
    apex1: str
    apex2: str
    r_apex: float
    r_radial: float
    mirrored: int
    origin: str

    @property
    def sort_key(self):
        return (self.subject_id, self.angle_deg, self.r_radial, self.mirrored)


def quantize_affect(affect: AffectPoint) -> tuple[float, float, float, float]:
    """(angle, intensity, valence, arousal) at 6-decimal manifest precision,
    with valence/arousal chosen so the parsed row still satisfies the polar
    coupling and the circle identity within 1e-6."""
    theta = round(affect.angle_deg, 6)
    inten = round(affect.intensity, 6)
    v_exact = inten * math.cos(math.radians(theta))
    a_exact = inten * math.sin(math.radians(theta))

    def steps(x):
        lo = math.floor(x * 1e6) / 1e6
        hi = math.ceil(x * 1e6) / 1e6
        return (lo, hi) if lo != hi else (lo,)

    best = None
    for v in steps(v_exact):
        for a in steps(a_exact):
            err = abs(v * v + a * a - inten * inten)
            key = (err, abs(v - v_exact) + abs(a - a_exact), v, a)
            if best is None or key < best[0]:
                best = (key, v, a)
    _, valence, arousal = best
    return theta, inten, valence, arousal


def record_for_face(face: AnnotatedFace, rel_file: str) -> ManifestRecord:
    job = face.provenance if isinstance(face.provenance, SynthesisJob) else None
    theta, inten, valence, arousal = quantize_affect(face.affect)
    if job is None or job.pass_through:
        origin = "original"
    elif job.intensity_assumed:
        origin = "assumed-intensity"
    else:
        origin = "synth"
    return ManifestRecord(
        subject_id=face.subject_id,
        file=rel_file,
        label=str(face.label),
        angle_deg=theta,
        intensity=inten,
        valence=valence,
        arousal=arousal,
        apex1=str(job.apex1) if job is not None and job.apex1 is not None else "",
        apex2=str(job.apex2) if job is not None and job.apex2 is not None else "",
        r_apex=round(job.r_apex, 6) if job is not None else 0.0,
        r_radial=round(job.r_radial, 6) if job is not None else 0.0,
        mirrored=int(job.mirrored) if job is not None else 0,
        origin=origin,
    )


def output_name(job: SynthesisJob | None, affect: AffectPoint) -> str:
    angle = affect.angle_deg if job is None else job.angle_deg
    ratio = 0.0 if job is None else job.radial_ratio
    mirrored = job is not None and job.mirrored
    return f"{angle:05.1f}_{ratio:.2f}{'_m' if mirrored else ''}.png"


def _fmt(value: float) -> str:
    return f"{value:.6f}"


def write_manifest(records: list[ManifestRecord], path: str | Path) -> None:
    """Write the manifest CSV: fixed header, 6-decimal floats, LF endings,
    rows sorted by (subject_id, angle_deg, r_radial, mirrored)."""
    rows = sorted(records, key=lambda r: r.sort_key)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(MANIFEST_HEADER.split(","))
    for r in rows:
        writer.writerow(
            [
                r.subject_id,
                r.file,
                r.label,
                _fmt(r.angle_deg),
                _fmt(r.intensity),
                _fmt(r.valence),
                _fmt(r.arousal),
                r.apex1,
                r.apex2,
                _fmt(r.r_apex),
                _fmt(r.r_radial),
                str(r.mirrored),
                r.origin,
            ]
        )
    try:
        Path(path).write_text(buf.getvalue(), encoding="utf-8", newline="")
    except OSError as exc:
        raise ManifestError(f"cannot write manifest {path}: {exc}") from exc


def read_manifest(path: str | Path) -> list[ManifestRecord]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ManifestError(f"cannot read manifest {path}: {exc}") from exc
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ManifestError(f"{path}: empty manifest") from None
    if header != MANIFEST_HEADER.split(","):
        raise ManifestError(f"{path}: unexpected header {header}")
    records = []
    for i, row in enumerate(reader, start=2):
        if len(row) != 13:
            raise ManifestError(f"{path}: line {i} has {len(row)} fields, expected 13")
        try:
            records.append(
                ManifestRecord(
                    subject_id=row[0],
                    file=row[1],
                    label=row[2],
                    angle_deg=float(row[3]),
                    intensity=float(row[4]),
                    valence=float(row[5]),
                    arousal=float(row[6]),
                    apex1=row[7],
                    apex2=row[8],
                    r_apex=float(row[9]),
                    r_radial=float(row[10]),
                    mirrored=int(row[11]),
                    origin=row[12],
                )
            )
        except ValueError as exc:
            raise ManifestError(f"{path}: line {i}: {exc}") from exc
    return records


@dataclass
class GenerationSummary:
    subjects: int = 0
    images: int = 0
    degenerate_triangles: int = 0
    warnings: list[str] = field(default_factory=list)
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def _generate_subject(args) -> tuple[str, list[ManifestRecord], int]:
    files, config = args
    subject = load_subject(files, config)
    jobs = plan_expressions(
        subject.subject_id,
        [(a.label, a.intensity_assumed) for a in subject.apexes],
        config.grid(),
        config.mirror,
        config.table(),
    )
    faces = run_subject(
        subject,
        jobs,
        fill=config.fill_color,
        flip_permutation=config.flip_permutation,
    )
    out_dir = Path(config.output_root) / files.subject_id
    out_dir.mkdir(parents=True, exist_ok=True)
    records = []
    degenerate = 0
    for face in faces:
        job = face.provenance if isinstance(face.provenance, SynthesisJob) else None
        name = output_name(job, face.affect)
        write_image(out_dir / name, face.image)
        records.append(record_for_face(face, f"{files.subject_id}/{name}"))
        degenerate += face.degenerate_triangles
    return files.subject_id, records, degenerate


def generate_dataset(
    config: PipelineConfig,
    jobs: int = 1,
    subject_filter=None,
    manifest_name: str = "manifest.csv",
) -> GenerationSummary:
    """Run the full pipeline: discover, align, synthesize, write images and
    the manifest. Subjects are independent units of parallelism; output is
    byte-identical for any worker count."""
    subjects, warnings = discover_subjects(config.input_root, config)
    if subject_filter is not None:
        subjects = [s for s in subjects if subject_filter(s.subject_id)]
    summary = GenerationSummary(warnings=list(warnings))

    out_root = Path(config.output_root)
    out_root.mkdir(parents=True, exist_ok=True)

    tasks = [(files, config) for files in subjects]
    results: list[tuple[str, list[ManifestRecord], int]] = []
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = {pool.submit(_generate_subject, t): t[0].subject_id for t in tasks}
            for fut, sid in futures.items():
                try:
                    results.append(fut.result())
                except Exception as exc:
                    summary.failures.append(f"subject {sid}: {exc}")
    else:
        for t in tasks:
            try:
                results.append(_generate_subject(t))
            except Exception as exc:
                summary.failures.append(f"subject {t[0].subject_id}: {exc}")

    all_records: list[ManifestRecord] = []
    for _, records, degenerate in results:
        all_records.extend(records)
        summary.degenerate_triangles += degenerate
    summary.subjects = len(results)
    summary.images = len(all_records)
    write_manifest(all_records, out_root / manifest_name)
    return summary
