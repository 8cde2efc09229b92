import math

import numpy as np
import pytest

from affectmorph.errors import TriangulationError
from affectmorph.geometry import incircle, orient2d, triangulate

from oracles import all_triangulations, circumcircle_contains, convex_hull, min_angle


def catalan(n):
    return math.comb(2 * n, n) // (n + 1)


class TestPredicates:
    def test_orient_signs(self):
        assert orient2d((0, 0), (1, 0), (0, 1)) == 1
        assert orient2d((0, 0), (0, 1), (1, 0)) == -1
        assert orient2d((0, 0), (1, 1), (2, 2)) == 0

    def test_orient_near_degenerate_exact(self):
        # collinear up to the last bit: the filter must fall through to exact
        a, b = (0.0, 0.0), (1e-30, 1e-30)
        c = (3e-30, 3e-30)
        assert orient2d(a, b, c) == 0

    def test_incircle_signs(self):
        a, b, c = (0, 0), (2, 0), (0, 2)
        assert incircle(a, b, c, (0.5, 0.5)) == 1
        assert incircle(a, b, c, (10, 10)) == -1
        assert incircle(a, b, c, (2, 2)) == 0  # cocircular corner of the square


class TestTriangulateBasics:
    def test_three_points(self):
        t = triangulate([(0, 0), (4, 0), (0, 3)])
        assert t.triangles.tolist() == [[0, 1, 2]]

    def test_unit_square_tie_break(self):
        # 4 cocircular corners: the kept diagonal contains the lowest index
        t = triangulate([(0, 0), (1, 0), (1, 1), (0, 1)])
        assert t.triangles.tolist() == [[0, 1, 2], [0, 2, 3]]

    def test_square_tie_break_other_labeling(self):
        # same square, vertex 0 moved to a different corner: diagonal follows it
        t = triangulate([(1, 0), (1, 1), (0, 1), (0, 0)])
        diagonals = set()
        for a, b, c in t.triangles:
            for e in ((a, b), (b, c), (a, c)):
                diagonals.add(tuple(sorted(e)))
        assert (0, 2) in diagonals

    def test_collinear_error(self):
        with pytest.raises(TriangulationError, match="collinear"):
            triangulate([(0, 0), (1, 1), (2, 2), (3, 3)])

    def test_duplicate_error_names_pair(self):
        with pytest.raises(TriangulationError, match="indices 1 and 2"):
            triangulate([(0, 0), (1, 0), (1, 0), (0, 1)])

    def test_too_few_points(self):
        with pytest.raises(TriangulationError):
            triangulate([(0, 0), (1, 0)])

    def test_nonfinite(self):
        with pytest.raises(TriangulationError):
            triangulate([(0, 0), (1, 0), (float("nan"), 1)])

    def test_deterministic(self):
        pts = np.random.default_rng(11).random((40, 2)) * 100
        a = triangulate(pts)
        b = triangulate(pts.copy())
        assert np.array_equal(a.triangles, b.triangles)

    def test_ccw_winding(self):
        pts = np.random.default_rng(5).random((30, 2)) * 50
        t = triangulate(pts)
        for i, j, k in t.triangles:
            assert orient2d(pts[i], pts[j], pts[k]) == 1

    def test_collinear_prefix_then_fan(self):
        t = triangulate([(0, 0), (1, 0), (2, 0), (3, 0), (1.5, 2), (1.5, -2)])
        assert len(t.triangles) == 6

    def test_point_on_hull_edge_insertion(self):
        # inserted point lies exactly on an existing hull edge
        t = triangulate([(0, 0), (4, 0), (2, 3), (2, 0)])
        assert len(t.triangles) == 2
        assert sorted(np.unique(t.triangles)) == [0, 1, 2, 3]


class TestTriangulationStructure:
    @pytest.mark.parametrize("seed", range(8))
    def test_euler_count(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(4, 60))
        pts = rng.random((n, 2)) * 100
        t = triangulate(pts)
        h = len(convex_hull(pts))
        assert len(t.triangles) == 2 * n - 2 - h

    @pytest.mark.parametrize("seed", range(12))
    def test_empty_circumcircle_bruteforce(self, seed):
        rng = np.random.default_rng(100 + seed)
        n = int(rng.integers(4, 50))
        pts = rng.random((n, 2)) * 200 - 100
        t = triangulate(pts)
        coords = [tuple(p) for p in pts]
        for i, j, k in t.triangles:
            for m in range(n):
                if m in (int(i), int(j), int(k)):
                    continue
                assert not circumcircle_contains(coords[i], coords[j], coords[k], coords[m])

    def test_lattice_cocircular(self):
        # every unit cell of an integer grid is cocircular: 18 triangles, and
        # every cocircular quad keeps the diagonal with the smaller low index
        pts = [(x, y) for y in range(4) for x in range(4)]
        t = triangulate(pts)
        assert len(t.triangles) == 18
        _assert_canonical_ties(t, pts)

    def test_every_vertex_used(self):
        pts = np.random.default_rng(77).random((25, 2)) * 10
        t = triangulate(pts)
        assert sorted(np.unique(t.triangles)) == list(range(25))


def _assert_canonical_ties(t, pts):
    by_edge = {}
    for tri in t.triangles:
        a, b, c = (int(v) for v in tri)
        for u, v, w in ((a, b, c), (b, c, a), (c, a, b)):
            by_edge.setdefault(tuple(sorted((u, v))), []).append(w)
    for (u, v), opp in by_edge.items():
        if len(opp) != 2:
            continue
        c, d = opp
        if incircle(pts[u], pts[v], pts[c], pts[d]) == 0:
            assert min(u, v) < min(c, d), f"tie on edge {(u, v)} vs {(c, d)}"


class TestMaxMinAngleOracle:
    def test_enumerator_catalan_count(self):
        # convex position (ellipse, so not cocircular): the number of
        # triangulations must equal the Catalan number C(n-2)
        for n in (5, 6, 8):
            pts = [
                (2.0 * math.cos(2 * math.pi * k / n + 0.05), math.sin(2 * math.pi * k / n + 0.05))
                for k in range(n)
            ]
            t = triangulate(pts)
            space = all_triangulations(pts, t.triangles)
            assert len(space) == catalan(n - 2)

    @pytest.mark.parametrize("seed", range(6))
    def test_delaunay_maximizes_min_angle(self, seed):
        rng = np.random.default_rng(300 + seed)
        n = int(rng.integers(4, 11))
        pts = rng.random((n, 2)) * 10
        t = triangulate(pts)
        mine = frozenset(tuple(sorted(map(int, tri))) for tri in t.triangles)
        space = all_triangulations(pts, t.triangles)
        assert mine in space
        best = min_angle(mine, pts)
        for other in space:
            assert best >= min_angle(other, pts) - 1e-9
