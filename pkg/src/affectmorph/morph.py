"""The two-image morph: interpolate landmarks, warp both faces onto the
interpolated shape through a shared triangulation, cross-dissolve.

The triangulation is computed once on the pairwise mean landmark set and
reused for both warps, so topology never flips mid-morph and
morph(a, b, r) mirrors morph(b, a, 1-r).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import Triangulation, triangulate
from .warp import warp_pair

__all__ = ["MorphResult", "interpolate_landmarks", "mean_shape", "morph"]


@dataclass(frozen=True)
class MorphResult:
    """Morphed image, its landmarks, and the ratio that produced them."""

    image: np.ndarray
    landmarks: np.ndarray  # interpolated point array, same length as the inputs
    ratio: float
    degenerate_triangles: int = 0


def interpolate_landmarks(src: np.ndarray, tgt: np.ndarray, r: float) -> np.ndarray:
    """Pointwise (1-r)*src + r*tgt in double precision."""
    if not 0.0 <= r <= 1.0:
        raise ValueError(f"ratio {r} outside [0, 1]")
    a = np.asarray(src, dtype=np.float64)
    b = np.asarray(tgt, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"landmark shapes disagree: {a.shape} vs {b.shape}")
    if r == 0.0:
        return a.copy()
    if r == 1.0:
        return b.copy()
    out = (1.0 - r) * a + r * b
    # Points shared by both sets (e.g. canvas boundary anchors) must stay
    # put bit-exactly, which (1-r)*q + r*q does not guarantee in floats.
    np.copyto(out, a, where=(a == b))
    return out


def mean_shape(src: np.ndarray, tgt: np.ndarray) -> np.ndarray:
    """Pairwise mean landmark set, the shared triangulation domain of a pair."""
    a = np.asarray(src, dtype=np.float64)
    b = np.asarray(tgt, dtype=np.float64)
    return (a + b) / 2.0


def morph(
    src_image: np.ndarray,
    src_points: np.ndarray,
    tgt_image: np.ndarray,
    tgt_points: np.ndarray,
    r: float,
    tri: Triangulation | None = None,
    fill=(128, 128, 128),
) -> MorphResult:
    """Morph src toward tgt with ratio r in [0, 1].

    Both faces must already sit on the same canvas with boundary points
    appended so the triangulation covers it. Pixels accumulate in floating
    point and are rounded exactly once.
    """
    if not 0.0 <= r <= 1.0:
        raise ValueError(f"ratio {r} outside [0, 1]")
    if src_image.shape != tgt_image.shape:
        raise ValueError(
            f"image shapes disagree: {src_image.shape} vs {tgt_image.shape}"
        )
    src_pts = np.asarray(src_points, dtype=np.float64)
    tgt_pts = np.asarray(tgt_points, dtype=np.float64)
    if src_pts.shape != tgt_pts.shape:
        raise ValueError(f"landmark shapes disagree: {src_pts.shape} vs {tgt_pts.shape}")

    if tri is None:
        tri = triangulate(mean_shape(src_pts, tgt_pts))

    target = interpolate_landmarks(src_pts, tgt_pts, r)
    warped_src, warped_tgt = warp_pair(
        src_image, src_pts, tgt_image, tgt_pts, target, tri, fill
    )

    blended = (1.0 - r) * warped_src.image + r * warped_tgt.image
    image = np.clip(np.rint(blended), 0, 255).astype(np.uint8)
    return MorphResult(
        image=image,
        landmarks=target,
        ratio=r,
        degenerate_triangles=warped_src.degenerate_triangles + warped_tgt.degenerate_triangles,
    )
