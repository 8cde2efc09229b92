"""Deterministic synthetic portraits with ground-truth 68-point landmarks.

Real expression corpora are license-restricted, so tests and demos build
subjects from drawn faces instead: an elliptical head with eyes, brows, nose
and mouth whose geometry is driven by a (valence, arousal) pair, rendered at
an arbitrary similarity placement. The landmarks are computed from the same
geometry that is drawn, so they are exact by construction.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw

from .affect import DEFAULT_ANGLES, Expression, va_from_polar
from .landmarks import LandmarkSet, serialize_landmarks

__all__ = [
    "FaceStyle",
    "style_for",
    "expression_landmarks",
    "synth_face",
    "write_sample_dataset",
]


@dataclass(frozen=True)
class FaceStyle:
    """Per-subject appearance knobs, all in face-space units (half-width 1)."""

    skin: tuple[int, int, int]
    hair: tuple[int, int, int]
    iris: tuple[int, int, int]
    lip: tuple[int, int, int]
    face_w: float
    face_h: float
    eye_dx: float
    eye_y: float
    eye_w: float
    brow_y: float
    mouth_y: float
    mouth_w: float
    nose_w: float


def style_for(subject_id: str) -> FaceStyle:
    """Stable appearance for a subject id (hash-seeded, session-independent)."""
    digest = hashlib.sha256(subject_id.encode("utf-8")).digest()
    rng = np.random.default_rng(int.from_bytes(digest[:8], "big"))

    def u(lo, hi):
        return float(lo + (hi - lo) * rng.random())

    skin_base = u(0.55, 0.9)
    return FaceStyle(
        skin=(
            int(255 * skin_base),
            int(255 * skin_base * u(0.75, 0.85)),
            int(255 * skin_base * u(0.55, 0.7)),
        ),
        hair=(int(u(20, 110)), int(u(15, 80)), int(u(10, 60))),
        iris=(int(u(30, 110)), int(u(40, 120)), int(u(50, 140))),
        lip=(int(u(150, 200)), int(u(60, 90)), int(u(60, 90))),
        face_w=u(0.9, 1.0),
        face_h=u(1.1, 1.25),
        eye_dx=u(0.38, 0.46),
        eye_y=u(-0.3, -0.22),
        eye_w=u(0.14, 0.18),
        brow_y=u(-0.52, -0.44),
        mouth_y=u(0.55, 0.65),
        mouth_w=u(0.3, 0.38),
        nose_w=u(0.1, 0.16),
    )


def expression_landmarks(valence: float, arousal: float, style: FaceStyle) -> np.ndarray:
    """68 face-space landmarks for an expression state; left/right symmetric."""
    v = float(np.clip(valence, -1.0, 1.0))
    a = float(np.clip(arousal, -1.0, 1.0))

    eye_h = max(0.02, 0.055 + 0.03 * a)
    brow_raise = -0.06 * max(a, 0.0) + 0.02 * max(-v, 0.0) * max(a, 0.0)
    corner_lift = -0.11 * v
    mouth_open = 0.015 + 0.09 * max(a, 0.0)
    mw = style.mouth_w * (1.0 + 0.15 * v)
    my = style.mouth_y
    hu, hd = 0.05, 0.055 + mouth_open

    pts = np.zeros((68, 2))

    # jaw 0-16 on the head ellipse (0 = left temple, 8 = chin, 16 = right)
    jaw_w, jaw_h = 0.92 * style.face_w, 0.95 * style.face_h
    for i in range(17):
        t = math.pi - i * math.pi / 16.0
        pts[i] = (jaw_w * math.cos(t), 0.08 + jaw_h * math.sin(t))

    # brows 17-21 / 22-26, arched, raised by arousal
    for i in range(5):
        x = -style.eye_dx - style.eye_w + i * (2.2 * style.eye_w) / 4.0
        arch = -0.035 * math.sin(math.pi * i / 4.0)
        y = style.brow_y + brow_raise + arch
        pts[17 + i] = (x, y)
        pts[26 - i] = (-x, y)

    # nose bridge 27-30 and nostril row 31-35
    for i in range(4):
        pts[27 + i] = (0.0, -0.18 + i * (0.40 / 3.0))
    nose_xs = (-style.nose_w, -style.nose_w / 2.0, 0.0, style.nose_w / 2.0, style.nose_w)
    nose_ys = (0.28, 0.30, 0.31, 0.30, 0.28)
    for i in range(5):
        pts[31 + i] = (nose_xs[i], nose_ys[i])

    # eyes 36-41 (image-left) / 42-47, hexagons whose centroid is the eye center
    ex, ey, ew = style.eye_dx, style.eye_y, style.eye_w
    hexagon = [
        (-ew, 0.0),
        (-ew / 2.0, -0.866 * eye_h),
        (ew / 2.0, -0.866 * eye_h),
        (ew, 0.0),
        (ew / 2.0, 0.866 * eye_h),
        (-ew / 2.0, 0.866 * eye_h),
    ]
    for i, (hx, hy) in enumerate(hexagon):
        pts[36 + i] = (-ex + hx, ey + hy)
        # right eye starts at the inner corner: mirror and rotate the order
    right = [(ex - hx, ey + hy) for hx, hy in hexagon]
    pts[42] = right[3]
    pts[43] = right[2]
    pts[44] = right[1]
    pts[45] = right[0]
    pts[46] = right[5]
    pts[47] = right[4]

    # outer mouth 48-59
    outer = [
        (-mw, corner_lift),
        (-0.66 * mw, -hu * 0.7),
        (-0.33 * mw, -hu),
        (0.0, -hu * 0.95),
        (0.33 * mw, -hu),
        (0.66 * mw, -hu * 0.7),
        (mw, corner_lift),
        (0.66 * mw, hd * 0.7),
        (0.33 * mw, hd),
        (0.0, hd),
        (-0.33 * mw, hd),
        (-0.66 * mw, hd * 0.7),
    ]
    for i, (x, y) in enumerate(outer):
        pts[48 + i] = (x, my + y)

    # inner mouth 60-67
    inner = [
        (-0.55 * mw, corner_lift * 0.8),
        (-0.25 * mw, -hu * 0.5),
        (0.0, -hu * 0.45),
        (0.25 * mw, -hu * 0.5),
        (0.55 * mw, corner_lift * 0.8),
        (0.25 * mw, hd * 0.55),
        (0.0, hd * 0.6),
        (-0.25 * mw, hd * 0.55),
    ]
    for i, (x, y) in enumerate(inner):
        pts[60 + i] = (x, my + y)

    return pts


def _ellipse(cx, cy, rx, ry, n=72):
    ts = np.linspace(0.0, 2.0 * math.pi, n, endpoint=False)
    return np.column_stack([cx + rx * np.cos(ts), cy + ry * np.sin(ts)])


def _place(points: np.ndarray, center, scale: float, roll_deg: float) -> np.ndarray:
    rad = math.radians(roll_deg)
    c, s = math.cos(rad), math.sin(rad)
    rot = np.array([[c, -s], [s, c]])
    return points @ (scale * rot).T + np.asarray(center, dtype=float)


def synth_face(
    subject_id: str,
    valence: float,
    arousal: float,
    canvas: tuple[int, int] = (256, 256),
    center: tuple[float, float] | None = None,
    scale: float | None = None,
    roll_deg: float = 0.0,
    background: tuple[int, int, int] = (210, 210, 215),
) -> tuple[np.ndarray, LandmarkSet]:
    """Render one synthetic portrait; returns the image and exact landmarks."""
    w, h = canvas
    style = style_for(subject_id)
    if center is None:
        center = (w / 2.0, h / 2.0)
    if scale is None:
        scale = 0.33 * min(w, h)

    lm = _place(expression_landmarks(valence, arousal, style), center, scale, roll_deg)

    img = Image.new("RGB", (w, h), background)
    draw = ImageDraw.Draw(img)

    def poly(points_face, color):
        placed = _place(np.asarray(points_face), center, scale, roll_deg)
        draw.polygon([tuple(p) for p in placed], fill=color)

    # hair cap behind the head, then the skin ellipse
    poly(_ellipse(0.0, -0.05, 1.02 * style.face_w, 1.05 * style.face_h), style.hair)
    poly(_ellipse(0.0, 0.08, style.face_w, style.face_h), style.skin)

    a = float(np.clip(arousal, -1.0, 1.0))
    eye_h = max(0.02, 0.055 + 0.03 * a)
    v = float(np.clip(valence, -1.0, 1.0))
    brow_raise = -0.06 * max(a, 0.0) + 0.02 * max(-v, 0.0) * max(a, 0.0)

    for side in (-1.0, 1.0):
        ex = side * style.eye_dx
        # brow band
        bx0 = ex - 1.1 * style.eye_w
        bx1 = ex + 1.1 * style.eye_w
        by = style.brow_y + brow_raise
        poly(
            [(bx0, by + 0.012), (bx0, by - 0.02), (ex, by - 0.045), (bx1, by - 0.02), (bx1, by + 0.012)],
            style.hair,
        )
        # sclera, iris, pupil
        poly(_ellipse(ex, style.eye_y, style.eye_w, eye_h, 36), (250, 250, 250))
        poly(_ellipse(ex, style.eye_y, 0.55 * min(style.eye_w, 2.2 * eye_h), 0.9 * eye_h, 24), style.iris)
        poly(_ellipse(ex, style.eye_y, 0.22 * style.eye_w, 0.5 * eye_h, 16), (15, 15, 15))

    # nose: bridge line plus nostril shadow
    bridge = _place(np.array([[0.0, -0.18], [0.02, 0.22]]), center, scale, roll_deg)
    draw.line([tuple(bridge[0]), tuple(bridge[1])], fill=_darken(style.skin, 0.75), width=max(1, int(scale * 0.03)))
    poly(_ellipse(0.0, 0.285, style.nose_w, 0.035, 20), _darken(style.skin, 0.8))

    # mouth: outer lips, then the inner opening
    lm_face = expression_landmarks(valence, arousal, style)
    poly(lm_face[48:60], style.lip)
    poly(lm_face[60:68], (70, 20, 25))

    image = np.asarray(img)
    return image, LandmarkSet(lm, w, h)


def _darken(color, k):
    return tuple(int(c * k) for c in color)


def write_sample_dataset(
    root: str | Path,
    subject_ids: list[str],
    canvas: tuple[int, int] = (256, 256),
    angles: dict[Expression, float] | None = None,
    intensities: dict[Expression, float] | None = None,
    jitter: bool = True,
    skip: dict[str, set[Expression]] | None = None,
) -> Path:
    """Write a pipeline-ready input tree of synthetic subjects.

    Each subject gets the 7 categorical expressions (minus any in `skip`),
    landmark sidecars, and an intensity.json. Placement is jittered per
    (subject, expression) when requested, so alignment has real work to do.
    """
    root = Path(root)
    angles = angles or dict(DEFAULT_ANGLES)
    w, h = canvas
    for sid in subject_ids:
        subject_dir = root / sid
        subject_dir.mkdir(parents=True, exist_ok=True)
        skipped = (skip or {}).get(sid, set())
        written = {}
        for expr in Expression:
            if expr in skipped:
                continue
            if expr is Expression.NEUTRAL:
                v = a = 0.0
            else:
                intensity = (intensities or {}).get(expr, 1.0)
                v, a = va_from_polar(intensity, angles[expr])
            if jitter:
                seed = hashlib.sha256(f"{sid}/{expr.value}".encode()).digest()
                rng = np.random.default_rng(int.from_bytes(seed[:8], "big"))
                center = (
                    w / 2.0 + (rng.random() - 0.5) * 0.06 * w,
                    h / 2.0 + (rng.random() - 0.5) * 0.06 * h,
                )
                scale = 0.3 * min(w, h) * (1.0 + (rng.random() - 0.5) * 0.12)
                roll = (rng.random() - 0.5) * 10.0
            else:
                center, scale, roll = None, None, 0.0
            image, lm = synth_face(
                sid, v, a, canvas=canvas, center=center, scale=scale, roll_deg=roll
            )
            name = f"{expr.value}.png"
            Image.fromarray(image, mode="RGB").save(subject_dir / name, format="PNG")
            (subject_dir / f"{expr.value}.landmarks.json").write_bytes(
                serialize_landmarks(lm, name)
            )
            written[expr] = True
        if intensities:
            doc = {
                expr.value: val
                for expr, val in intensities.items()
                if expr in written and expr is not Expression.NEUTRAL
            }
            (subject_dir / "intensity.json").write_text(
                json.dumps(doc, indent=2), encoding="utf-8"
            )
    return root
