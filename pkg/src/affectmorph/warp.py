"""Raster resampling: bilinear lookup, whole-image affine warps, and the
piecewise-affine warp driven by a landmark triangulation.

All warps use inverse mapping (one source lookup per destination pixel), so
every pixel is computed independently and results cannot depend on any
parallel schedule. Pixel centers sit at integer coordinates: landmark (0, 0)
is the center of the top-left pixel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import Triangulation

__all__ = ["Warped", "bilinear_sample", "affine_resample", "piecewise_warp", "warp_pair"]

# Destination triangles flatter than this (in px^2) get no affine solve;
# their pixels take the fill color and are tallied as warnings.
DEGENERATE_AREA_PX2 = 1e-6

# Slack for the point-in-triangle test so pixels exactly on shared edges are
# claimed instead of falling through the mesh.
_EDGE_SLACK = 1e-9


@dataclass(frozen=True)
class Warped:
    """A warped image plus the number of degenerate destination triangles."""

    image: np.ndarray
    degenerate_triangles: int


def bilinear_sample(image: np.ndarray, xs: np.ndarray, ys: np.ndarray, fill) -> np.ndarray:
    """Sample image at float pixel coordinates; outside [0, W-1]x[0, H-1] -> fill.

    Returns float64 samples of shape xs.shape + (channels,). Coordinates
    within 1e-6 px of the valid span count as inside (inverse affine maps of
    canvas-edge landmarks land epsilon outside) and clamp to the edge pixel.
    """
    h, w = image.shape[:2]
    eps = 1e-6
    inside = (xs >= -eps) & (xs <= w - 1 + eps) & (ys >= -eps) & (ys <= h - 1 + eps)

    cx = np.clip(xs, 0, w - 1)
    cy = np.clip(ys, 0, h - 1)
    x0 = np.floor(cx).astype(np.intp)
    y0 = np.floor(cy).astype(np.intp)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = (cx - x0)[..., None]
    fy = (cy - y0)[..., None]

    img = image.astype(np.float64, copy=False)
    top = img[y0, x0] * (1.0 - fx) + img[y0, x1] * fx
    bot = img[y1, x0] * (1.0 - fx) + img[y1, x1] * fx
    out = top * (1.0 - fy) + bot * fy

    fill_vec = np.asarray(fill, dtype=np.float64)
    out[~inside] = fill_vec
    return out


def affine_resample(
    image: np.ndarray, inverse: np.ndarray, out_shape: tuple[int, int], fill
) -> np.ndarray:
    """Resample onto an (H, W) canvas through a destination->source 2x3 affine."""
    h, w = out_shape
    ygrid, xgrid = np.mgrid[0:h, 0:w]
    sx = inverse[0, 0] * xgrid + inverse[0, 1] * ygrid + inverse[0, 2]
    sy = inverse[1, 0] * xgrid + inverse[1, 1] * ygrid + inverse[1, 2]
    out = bilinear_sample(image, sx, sy, fill)
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


def _triangle_affines(tri: np.ndarray, dst: np.ndarray, src: np.ndarray):
    """Per-triangle destination->source affine maps (t, 2, 3); flags degenerates."""
    t = len(tri)
    d = dst[tri]  # (t, 3, 2)
    s = src[tri]
    ones = np.ones((t, 3, 1))
    dmat = np.concatenate([d, ones], axis=2)  # rows [xi, yi, 1]
    area2 = np.abs(np.linalg.det(dmat))  # twice the triangle area
    degenerate = area2 < 2.0 * DEGENERATE_AREA_PX2

    maps = np.zeros((t, 2, 3))
    ok = ~degenerate
    if ok.any():
        sol = np.linalg.solve(dmat[ok], s[ok])  # (k, 3, 2): [x y 1] @ sol = [sx sy]
        maps[ok] = sol.transpose(0, 2, 1)
    return maps, degenerate


def _rasterize(tri: np.ndarray, dst: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    """Assign each pixel its covering triangle index (-1 outside the mesh).

    Triangles are painted in index order and never overwrite, so a pixel on a
    shared edge deterministically belongs to the lower-indexed triangle.
    """
    h, w = shape
    owner = np.full((h, w), -1, dtype=np.int32)
    for t, (i, j, k) in enumerate(tri):
        ax, ay = dst[i]
        bx, by = dst[j]
        cx, cy = dst[k]
        x_lo = max(int(np.floor(min(ax, bx, cx))), 0)
        x_hi = min(int(np.ceil(max(ax, bx, cx))), w - 1)
        y_lo = max(int(np.floor(min(ay, by, cy))), 0)
        y_hi = min(int(np.ceil(max(ay, by, cy))), h - 1)
        if x_hi < x_lo or y_hi < y_lo:
            continue
        ys, xs = np.mgrid[y_lo : y_hi + 1, x_lo : x_hi + 1]
        det = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
        if det == 0.0:
            continue
        l1 = ((by - cy) * (xs - cx) + (cx - bx) * (ys - cy)) / det
        l2 = ((cy - ay) * (xs - cx) + (ax - cx) * (ys - cy)) / det
        l3 = 1.0 - l1 - l2
        inside = (l1 >= -_EDGE_SLACK) & (l2 >= -_EDGE_SLACK) & (l3 >= -_EDGE_SLACK)
        patch = owner[y_lo : y_hi + 1, x_lo : x_hi + 1]
        claim = inside & (patch == -1)
        patch[claim] = t
    return owner


def _warp_onto(image, src, dst, owner, tri, fill_vec):
    """One inverse-mapped sampling pass over a precomputed owner map."""
    h, w = owner.shape
    maps, degenerate = _triangle_affines(tri.triangles, dst, src)
    good = owner >= 0
    if degenerate.any():
        good &= ~degenerate[np.clip(owner, 0, None)]

    ygrid, xgrid = np.mgrid[0:h, 0:w]
    t_idx = owner[good]
    gx = xgrid[good]
    gy = ygrid[good]
    sx = maps[t_idx, 0, 0] * gx + maps[t_idx, 0, 1] * gy + maps[t_idx, 0, 2]
    sy = maps[t_idx, 1, 0] * gx + maps[t_idx, 1, 1] * gy + maps[t_idx, 1, 2]

    out = np.empty((h, w, image.shape[2]), dtype=np.float64)
    out[:, :] = fill_vec
    out[good] = bilinear_sample(image, sx, sy, fill_vec)
    return out, int(degenerate.sum())


def _check_points(src, dst, tri):
    if src.shape != dst.shape:
        raise ValueError(f"point arrays disagree: {src.shape} vs {dst.shape}")
    if len(src) != len(tri.points):
        raise ValueError(
            f"triangulation has {len(tri.points)} vertices, got {len(src)} points"
        )


def piecewise_warp(
    image: np.ndarray,
    from_points: np.ndarray,
    to_points: np.ndarray,
    tri: Triangulation,
    fill=(128, 128, 128),
    return_float: bool = False,
) -> Warped:
    """Warp image so that from_points move onto to_points.

    tri must be built over a point set index-compatible with both arrays
    (same length, same ordering); each destination pixel is looked up through
    its triangle's inverse affine and sampled bilinearly from the source.
    """
    src = np.asarray(from_points, dtype=float)
    dst = np.asarray(to_points, dtype=float)
    _check_points(src, dst, tri)

    h, w = image.shape[:2]
    owner = _rasterize(tri.triangles, dst, (h, w))
    out, n_degenerate = _warp_onto(
        image, src, dst, owner, tri, np.asarray(fill, dtype=np.float64)
    )
    if not return_float:
        out = np.clip(np.rint(out), 0, 255).astype(np.uint8)
    return Warped(image=out, degenerate_triangles=n_degenerate)


def warp_pair(
    image_a: np.ndarray,
    from_a: np.ndarray,
    image_b: np.ndarray,
    from_b: np.ndarray,
    to_points: np.ndarray,
    tri: Triangulation,
    fill=(128, 128, 128),
) -> tuple[Warped, Warped]:
    """Warp two images onto the same destination shape, rasterizing it once.

    This is the morph inner loop: both warps share the destination point set
    and triangulation, so the pixel->triangle assignment is identical.
    """
    src_a = np.asarray(from_a, dtype=float)
    src_b = np.asarray(from_b, dtype=float)
    dst = np.asarray(to_points, dtype=float)
    _check_points(src_a, dst, tri)
    _check_points(src_b, dst, tri)
    if image_a.shape != image_b.shape:
        raise ValueError(f"image shapes disagree: {image_a.shape} vs {image_b.shape}")

    h, w = image_a.shape[:2]
    owner = _rasterize(tri.triangles, dst, (h, w))
    fill_vec = np.asarray(fill, dtype=np.float64)
    out_a, deg_a = _warp_onto(image_a, src_a, dst, owner, tri, fill_vec)
    out_b, deg_b = _warp_onto(image_b, src_b, dst, owner, tri, fill_vec)
    return (
        Warped(image=out_a, degenerate_triangles=deg_a),
        Warped(image=out_b, degenerate_triangles=deg_b),
    )
