"""Landmark sets: sidecar JSON parsing, eye-based alignment onto a canonical
canvas, boundary-point augmentation, and horizontal mirroring.

Points follow the standard 68-point convention (jaw 0-16, brows 17-26, nose
27-35, eyes 36-47, mouth 48-67); other counts are allowed but alignment and
mirroring then need explicit eye indices / a flip permutation.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AlignmentError, ConfigurationError, SidecarError
from .warp import affine_resample

__all__ = [
    "LandmarkSet",
    "CanonicalFrame",
    "DEFAULT_FRAME",
    "FLIP_PERMUTATION_68",
    "LEFT_EYE_INDICES_68",
    "RIGHT_EYE_INDICES_68",
    "parse_landmarks",
    "serialize_landmarks",
    "eye_centers",
    "align_to_canonical",
    "add_boundary_points",
    "mirror",
]

SIDECAR_VERSION = 1

LEFT_EYE_INDICES_68 = tuple(range(36, 42))
RIGHT_EYE_INDICES_68 = tuple(range(42, 48))

# Index permutation applied when flipping a 68-point set about the vertical
# midline, so that e.g. left-eye indices keep indexing the image-left eye.
FLIP_PERMUTATION_68 = (
    # jaw
    16, 15, 14, 13, 12, 11, 10, 9, 8, 7, 6, 5, 4, 3, 2, 1, 0,
    # brows
    26, 25, 24, 23, 22, 21, 20, 19, 18, 17,
    # nose bridge + nostrils
    27, 28, 29, 30, 35, 34, 33, 32, 31,
    # eyes
    45, 44, 43, 42, 47, 46, 39, 38, 37, 36, 41, 40,
    # outer mouth
    54, 53, 52, 51, 50, 49, 48, 59, 58, 57, 56, 55,
    # inner mouth
    64, 63, 62, 61, 60, 67, 66, 65,
)


@dataclass(frozen=True)
class LandmarkSet:
    """Ordered 2-D landmark coordinates in pixel space (origin top-left)."""

    points: np.ndarray  # (p, 2) float64
    image_width: int
    image_height: int

    def __post_init__(self):
        pts = np.ascontiguousarray(np.asarray(self.points, dtype=np.float64))
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise SidecarError(f"points must be an (p, 2) array, got shape {pts.shape}")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if self.image_width <= 0 or self.image_height <= 0:
            raise SidecarError(
                f"image dimensions must be positive, got {self.image_width}x{self.image_height}"
            )

    def __len__(self) -> int:
        return len(self.points)

    def with_points(self, points: np.ndarray) -> "LandmarkSet":
        return LandmarkSet(points, self.image_width, self.image_height)


@dataclass(frozen=True)
class CanonicalFrame:
    """Target canvas and the eye anchors every face is aligned onto."""

    canvas_width: int = 512
    canvas_height: int = 512
    left_eye_anchor: tuple[float, float] = (176.0, 230.0)
    right_eye_anchor: tuple[float, float] = (336.0, 230.0)
    fill_color: tuple[int, int, int] = (128, 128, 128)

    def __post_init__(self):
        lx, ly = self.left_eye_anchor
        rx, ry = self.right_eye_anchor
        if abs(ly - ry) > 1e-6:
            raise ConfigurationError("eye anchors must sit at equal height")
        mid = self.canvas_width / 2.0
        if abs((lx + rx) / 2.0 - mid) > 1e-6:
            raise ConfigurationError(
                "eye anchors must be symmetric about the canvas vertical midline"
            )
        if not lx < rx:
            raise ConfigurationError("left eye anchor must lie left of the right one")


DEFAULT_FRAME = CanonicalFrame()


def parse_landmarks(data: bytes | str, expected_count: int | None = None) -> LandmarkSet:
    """Parse a landmark sidecar JSON document (see serialize_landmarks)."""
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise SidecarError(f"malformed sidecar JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SidecarError("sidecar root must be a JSON object")
    if doc.get("version") != SIDECAR_VERSION:
        raise SidecarError(f"field 'version': expected {SIDECAR_VERSION}, got {doc.get('version')!r}")
    for key in ("width", "height"):
        if not isinstance(doc.get(key), (int, float)) or isinstance(doc.get(key), bool):
            raise SidecarError(f"field '{key}': missing or non-numeric")
    raw = doc.get("points")
    if not isinstance(raw, list):
        raise SidecarError("field 'points': missing or not a list")
    pts = np.empty((len(raw), 2), dtype=np.float64)
    for i, item in enumerate(raw):
        if (
            not isinstance(item, (list, tuple))
            or len(item) != 2
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in item)
        ):
            raise SidecarError(f"field 'points': entry {i} is not an [x, y] pair")
        pts[i] = item
    if expected_count is not None and len(pts) != expected_count:
        raise SidecarError(f"point count mismatch: expected {expected_count}, got {len(pts)}")
    bad = np.flatnonzero(~np.isfinite(pts).all(axis=1))
    if bad.size:
        raise SidecarError(f"non-finite coordinate at index {int(bad[0])}")
    return LandmarkSet(pts, int(doc["width"]), int(doc["height"]))


def serialize_landmarks(lm: LandmarkSet, image: str) -> bytes:
    """Render the sidecar JSON document for a landmark set."""
    doc = {
        "version": SIDECAR_VERSION,
        "image": image,
        "width": lm.image_width,
        "height": lm.image_height,
        "points": [[float(x), float(y)] for x, y in lm.points],
    }
    return json.dumps(doc).encode("utf-8")


def eye_centers(
    lm: LandmarkSet,
    left_indices=LEFT_EYE_INDICES_68,
    right_indices=RIGHT_EYE_INDICES_68,
) -> tuple[tuple[float, float], tuple[float, float]]:
    """Centroids of the two eye contours; image-left eye comes first."""
    idx = max(max(left_indices), max(right_indices))
    if idx >= len(lm):
        raise AlignmentError(f"eye index {idx} out of range for {len(lm)} landmarks")
    left = lm.points[list(left_indices)].mean(axis=0)
    right = lm.points[list(right_indices)].mean(axis=0)
    if math.hypot(right[0] - left[0], right[1] - left[1]) == 0.0:
        raise AlignmentError("eye centers coincide")
    if not left[0] < right[0]:
        raise AlignmentError(
            "right eye center is not to the right of the left one "
            "(mirrored input? reflection is disallowed)"
        )
    return (float(left[0]), float(left[1])), (float(right[0]), float(right[1]))


def _similarity_from_eyes(src_l, src_r, dst_l, dst_r):
    """Closed-form similarity (rotation + uniform scale + translation) mapping
    the source eye pair exactly onto the destination pair, as complex a, b."""
    z1 = complex(*src_l)
    z2 = complex(*src_r)
    w1 = complex(*dst_l)
    w2 = complex(*dst_r)
    a = (w2 - w1) / (z2 - z1)
    b = w1 - a * z1
    return a, b


def align_to_canonical(
    image: np.ndarray,
    lm: LandmarkSet,
    frame: CanonicalFrame = DEFAULT_FRAME,
    left_indices=LEFT_EYE_INDICES_68,
    right_indices=RIGHT_EYE_INDICES_68,
) -> tuple[np.ndarray, LandmarkSet]:
    """Rotate/scale/translate a face so its eye centers land on the frame anchors.

    The transform is a pure similarity (no shear, no reflection); the image is
    resampled bilinearly onto the canonical canvas with out-of-source regions
    filled with the frame's fill color.
    """
    left, right = eye_centers(lm, left_indices, right_indices)
    if math.hypot(right[0] - left[0], right[1] - left[1]) < 2.0:
        raise AlignmentError("eye centers closer than 2 px; scale would explode")

    a, b = _similarity_from_eyes(left, right, frame.left_eye_anchor, frame.right_eye_anchor)

    z = lm.points[:, 0] + 1j * lm.points[:, 1]
    moved = a * z + b
    new_pts = np.column_stack([moved.real, moved.imag])

    inv_a = 1.0 / a
    inv_b = -b / a
    inverse = np.array(
        [
            [inv_a.real, -inv_a.imag, inv_b.real],
            [inv_a.imag, inv_a.real, inv_b.imag],
        ]
    )
    canvas = affine_resample(
        image, inverse, (frame.canvas_height, frame.canvas_width), frame.fill_color
    )
    return canvas, LandmarkSet(new_pts, frame.canvas_width, frame.canvas_height)


def add_boundary_points(lm: LandmarkSet) -> LandmarkSet:
    """Append the 4 canvas corners and 4 edge midpoints after the facial points,
    so a triangulation of the set covers the whole canvas."""
    w, h = lm.image_width, lm.image_height
    extra = np.array(
        [
            (0.0, 0.0),
            (w - 1.0, 0.0),
            (w - 1.0, h - 1.0),
            (0.0, h - 1.0),
            (w // 2, 0.0),
            (w - 1.0, h // 2),
            (w // 2, h - 1.0),
            (0.0, h // 2),
        ],
        dtype=np.float64,
    )
    return lm.with_points(np.vstack([lm.points, extra]))


def mirror(
    image: np.ndarray,
    lm: LandmarkSet,
    flip_permutation: tuple[int, ...] | None = None,
) -> tuple[np.ndarray, LandmarkSet]:
    """Flip a face about the vertical canvas midline.

    Landmarks are re-permuted so semantic ordering survives the flip; with the
    default 68-point table, left-eye indices still index the image-left eye.
    """
    perm = flip_permutation
    if perm is None:
        if len(lm) != 68:
            raise ConfigurationError(
                f"no flip permutation available for {len(lm)}-point sets; supply one"
            )
        perm = FLIP_PERMUTATION_68
    if sorted(perm) != list(range(len(lm))):
        raise ConfigurationError("flip permutation is not a permutation of the point indices")

    flipped = np.ascontiguousarray(image[:, ::-1])
    pts = lm.points[list(perm)].copy()
    pts[:, 0] = (lm.image_width - 1.0) - pts[:, 0]
    return flipped, lm.with_points(pts)
