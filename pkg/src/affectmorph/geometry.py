"""Deterministic Delaunay triangulation.

Incremental Bowyer-Watson over a ghost vertex (no finite super-triangle, so
hull handling is exact), with floating-point orientation/in-circle predicates
that fall back to exact rational arithmetic whenever the computed value is
within its forward error bound. Determinism comes from inserting points in
input order, scanning triangles in creation order, and canonicalizing
cocircular quads so the kept diagonal is the one whose lowest vertex index
is smallest.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import TriangulationError

__all__ = ["Triangulation", "triangulate", "orient2d", "incircle"]

_GHOST = -1

# Machine epsilon based coefficients for the floating-point filters; both are
# looser than the tight Shewchuk bounds, which only costs extra exact-path
# evaluations, never a wrong sign.
_EPS = np.finfo(float).eps
_ORIENT_BOUND = 4.0 * _EPS
_INCIRCLE_BOUND = 16.0 * _EPS


def _sign(x: float) -> int:
    return int(x > 0) - int(x < 0)


def orient2d(a, b, c) -> int:
    """Sign of the signed area of (a, b, c): +1 counter-clockwise, 0 collinear."""
    detleft = (a[0] - c[0]) * (b[1] - c[1])
    detright = (a[1] - c[1]) * (b[0] - c[0])
    det = detleft - detright
    magnitude = abs(detleft) + abs(detright)
    if abs(det) > _ORIENT_BOUND * magnitude:
        return _sign(det)
    return _orient2d_exact(a, b, c)


def _orient2d_exact(a, b, c) -> int:
    ax, ay = Fraction(float(a[0])), Fraction(float(a[1]))
    bx, by = Fraction(float(b[0])), Fraction(float(b[1]))
    cx, cy = Fraction(float(c[0])), Fraction(float(c[1]))
    det = (ax - cx) * (by - cy) - (ay - cy) * (bx - cx)
    return (det > 0) - (det < 0)


def incircle(a, b, c, d) -> int:
    """Sign of the in-circle determinant for CCW (a, b, c).

    +1: d strictly inside the circumcircle, 0: cocircular, -1: outside.
    """
    adx = a[0] - d[0]
    ady = a[1] - d[1]
    bdx = b[0] - d[0]
    bdy = b[1] - d[1]
    cdx = c[0] - d[0]
    cdy = c[1] - d[1]

    ad2 = adx * adx + ady * ady
    bd2 = bdx * bdx + bdy * bdy
    cd2 = cdx * cdx + cdy * cdy

    t1 = ad2 * (bdx * cdy - bdy * cdx)
    t2 = bd2 * (adx * cdy - ady * cdx)
    t3 = cd2 * (adx * bdy - ady * bdx)
    det = t1 - t2 + t3

    m1 = ad2 * (abs(bdx * cdy) + abs(bdy * cdx))
    m2 = bd2 * (abs(adx * cdy) + abs(ady * cdx))
    m3 = cd2 * (abs(adx * bdy) + abs(ady * bdx))
    magnitude = m1 + m2 + m3
    if abs(det) > _INCIRCLE_BOUND * magnitude:
        return _sign(det)
    return _incircle_exact(a, b, c, d)


def _incircle_exact(a, b, c, d) -> int:
    ax, ay = Fraction(float(a[0])), Fraction(float(a[1]))
    bx, by = Fraction(float(b[0])), Fraction(float(b[1]))
    cx, cy = Fraction(float(c[0])), Fraction(float(c[1]))
    dx, dy = Fraction(float(d[0])), Fraction(float(d[1]))
    adx, ady = ax - dx, ay - dy
    bdx, bdy = bx - dx, by - dy
    cdx, cdy = cx - dx, cy - dy
    det = (
        (adx * adx + ady * ady) * (bdx * cdy - bdy * cdx)
        - (bdx * bdx + bdy * bdy) * (adx * cdy - ady * cdx)
        + (cdx * cdx + cdy * cdy) * (adx * bdy - ady * bdx)
    )
    return (det > 0) - (det < 0)


@dataclass(frozen=True)
class Triangulation:
    """Vertices plus CCW triangles; triangle order and winding are canonical."""

    points: np.ndarray  # (n, 2) float64
    triangles: np.ndarray  # (t, 3) int32, CCW, lowest index first, sorted

    @property
    def edges(self) -> set[tuple[int, int]]:
        out: set[tuple[int, int]] = set()
        for a, b, c in self.triangles:
            out.add((min(a, b), max(a, b)))
            out.add((min(b, c), max(b, c)))
            out.add((min(c, a), max(c, a)))
        return out


class _Mesh:
    """Triangle soup with a directed-edge adjacency map and a ghost vertex."""

    def __init__(self, pts: list[tuple[float, float]]):
        self.pts = pts
        self.tris: dict[int, tuple[int, int, int]] = {}
        self.edge: dict[tuple[int, int], int] = {}
        self._next = 0

    def add(self, a: int, b: int, c: int) -> int:
        # Rotate so a possible ghost sits last; cyclic order is preserved.
        if a == _GHOST:
            a, b, c = b, c, a
        elif b == _GHOST:
            a, b, c = c, a, b
        tid = self._next
        self._next += 1
        self.tris[tid] = (a, b, c)
        for u, v in ((a, b), (b, c), (c, a)):
            self.edge[(u, v)] = tid
        return tid

    def remove(self, tid: int) -> None:
        a, b, c = self.tris.pop(tid)
        for u, v in ((a, b), (b, c), (c, a)):
            del self.edge[(u, v)]

    def _ghost_conflict(self, g0: int, g1: int, p: int) -> bool:
        # Ghost (g0, g1, GHOST) owns the reverse of CCW hull edge (g1, g0);
        # its "circumdisk" is the open half-plane beyond the hull plus the
        # open hull segment itself (the limit of a circle through g0, g1).
        s = orient2d(self.pts[g0], self.pts[g1], self.pts[p])
        if s > 0:
            return True
        if s < 0:
            return False
        ax, ay = self.pts[g0]
        bx, by = self.pts[g1]
        px, py = self.pts[p]
        if ax != bx:
            lo, hi = min(ax, bx), max(ax, bx)
            return lo < px < hi
        lo, hi = min(ay, by), max(ay, by)
        return lo < py < hi

    def insert(self, p: int) -> None:
        conflicts = []
        for tid, (a, b, c) in self.tris.items():
            if c == _GHOST:
                if self._ghost_conflict(a, b, p):
                    conflicts.append(tid)
            elif incircle(self.pts[a], self.pts[b], self.pts[c], self.pts[p]) > 0:
                conflicts.append(tid)

        cavity = set(conflicts)
        boundary = []
        for tid in conflicts:
            a, b, c = self.tris[tid]
            for u, v in ((a, b), (b, c), (c, a)):
                if self.edge[(v, u)] not in cavity:
                    boundary.append((u, v))
        for tid in conflicts:
            self.remove(tid)
        for u, v in boundary:
            self.add(u, v, p)

    def finite_triangles(self) -> list[tuple[int, int, int]]:
        return [t for t in self.tris.values() if t[2] != _GHOST]

    def canonicalize_cocircular(self) -> None:
        """Flip exactly-cocircular quads until the kept diagonal is the one
        whose lowest vertex index is smallest. Terminates: each flip strictly
        lowers the sum of per-diagonal minimum indices."""
        while True:
            flipped = False
            for u, v in sorted(
                (u, v) for (u, v) in self.edge if u != _GHOST and v != _GHOST and u < v
            ):
                t1 = self.edge.get((u, v))
                t2 = self.edge.get((v, u))
                if t1 is None or t2 is None:
                    continue
                tri1 = self.tris[t1]
                tri2 = self.tris[t2]
                if tri1[2] == _GHOST or tri2[2] == _GHOST:
                    continue
                c = next(w for w in tri1 if w not in (u, v))
                d = next(w for w in tri2 if w not in (u, v))
                if min(c, d) >= min(u, v):
                    continue
                if incircle(self.pts[u], self.pts[v], self.pts[c], self.pts[d]) != 0:
                    continue
                # Shared edge as directed by t1: find its orientation there.
                a, b = (u, v) if _has_directed(tri1, u, v) else (v, u)
                self.remove(t1)
                self.remove(t2)
                self.add(a, d, c)
                self.add(d, b, c)
                flipped = True
                break
            if not flipped:
                return


def _has_directed(tri: tuple[int, int, int], u: int, v: int) -> bool:
    a, b, c = tri
    return (a, b) == (u, v) or (b, c) == (u, v) or (c, a) == (u, v)


def _check_input(pts: np.ndarray) -> None:
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise TriangulationError(f"expected an (n, 2) point array, got shape {pts.shape}")
    if len(pts) < 3:
        raise TriangulationError(f"need at least 3 points, got {len(pts)}")
    if not np.isfinite(pts).all():
        raise TriangulationError("points contain non-finite coordinates")
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    for i, j in zip(order[:-1], order[1:]):
        if abs(pts[i, 0] - pts[j, 0]) <= 1e-9 and abs(pts[i, 1] - pts[j, 1]) <= 1e-9:
            a, b = (int(i), int(j)) if i < j else (int(j), int(i))
            raise TriangulationError(f"duplicate points at indices {a} and {b}")


def triangulate(points) -> Triangulation:
    """Delaunay triangulation of a 2-D point set.

    Output is deterministic for identical input: points are inserted in input
    order and cocircular ties keep the diagonal with the smallest low vertex
    index (the unit square triangulates as (0,1,2), (0,2,3)).
    """
    pts = np.ascontiguousarray(np.asarray(points, dtype=float))
    _check_input(pts)
    coords = [(float(x), float(y)) for x, y in pts]

    mesh: _Mesh | None = None
    line: list[int] = []  # collinear prefix, sorted by (x, y)

    for p in range(len(coords)):
        if mesh is not None:
            mesh.insert(p)
            continue
        if len(line) < 2:
            line.append(p)
            line.sort(key=coords.__getitem__)
            continue
        side = orient2d(coords[line[0]], coords[line[-1]], coords[p])
        if side == 0:
            line.append(p)
            line.sort(key=coords.__getitem__)
            continue
        # First non-collinear point: fan it against the collinear chain.
        mesh = _Mesh(coords)
        chain = line if side > 0 else line[::-1]
        for s0, s1 in zip(chain[:-1], chain[1:]):
            mesh.add(s0, s1, p)
        hull = chain + [p]
        for u, v in zip(hull, hull[1:] + hull[:1]):
            mesh.add(v, u, _GHOST)

    if mesh is None:
        raise TriangulationError("all points are collinear")

    mesh.canonicalize_cocircular()

    tris = []
    for a, b, c in mesh.finite_triangles():
        # Rotate lowest vertex first, preserving CCW winding.
        if b < a and b <= c:
            a, b, c = b, c, a
        elif c < a and c < b:
            a, b, c = c, a, b
        tris.append((a, b, c))
    tris.sort()
    return Triangulation(points=pts, triangles=np.array(tris, dtype=np.int32))
