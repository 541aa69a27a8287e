import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from palmcluster.exceptions import DegenerateInput
from palmcluster.geometry import (
    UNBOUNDED,
    Rect,
    circumcircle,
    delaunay_cell_characteristic,
    inradius,
    is_interior,
    triangulate,
    voronoi_circumradius,
)
from palmcluster.oracle import brute_delaunay_check, brute_voronoi_cell, polygon_circumradius, polygon_inradius


def bounding_box(tri):
    pts = np.vstack([tri.vertices, tri.circumcenters])
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    return Rect(lo[0] - 1, lo[1] - 1, hi[0] + 1, hi[1] + 1)


def hexagon_ring(n_rings=1):
    # Triangular lattice around the origin; the central cell is a regular hexagon.
    pts = []
    for i in range(-n_rings - 2, n_rings + 3):
        for j in range(-n_rings - 2, n_rings + 3):
            pts.append((i + 0.5 * j, j * math.sqrt(3) / 2))
    pts = np.array(pts)
    order = np.argsort(np.hypot(*pts.T), kind="stable")
    return pts[order]


def test_rect_basics():
    r = Rect.centered(2.0, 1.0)
    assert (r.width, r.height, r.area) == (4.0, 2.0, 8.0)
    assert r.pad(1.0) == Rect(-3, -2, 3, 2)
    assert r.intersect(Rect(1, 0, 5, 5)) == Rect(1, 0, 2, 1)
    assert r.intersect(Rect(3, 3, 4, 4)) is None
    np.testing.assert_array_equal(r.contains([[0, 0], [2, 1], [2.1, 0]]), [True, True, False])
    np.testing.assert_allclose(r.boundary_distance([[0, 0], [3, 0]]), [1.0, -1.0])
    assert r.contains_rect(Rect(-1, -1, 1, 1)) and not r.contains_rect(Rect(-1, -1, 3, 1))
    with pytest.raises(DegenerateInput):
        Rect(0, 0, 0, 1)


def test_circumcircle_right_triangle():
    c, r = circumcircle((0, 0), (2, 0), (0, 2))
    np.testing.assert_allclose(c, [1, 1])
    assert r == pytest.approx(math.sqrt(2))


def test_circumcircle_equilateral():
    pts = [(math.cos(t), math.sin(t)) for t in (0.3, 0.3 + 2 * math.pi / 3, 0.3 + 4 * math.pi / 3)]
    c, r = circumcircle(*pts)
    np.testing.assert_allclose(c, [0, 0], atol=1e-15)
    assert r == pytest.approx(1.0, rel=1e-14)


def test_circumcircle_collinear():
    with pytest.raises(DegenerateInput):
        circumcircle((0, 0), (1, 1), (3, 3))


def test_three_points_all_hull():
    tri = triangulate([[0, 0], [1, 0], [0, 1]])
    assert tri.n_triangles == 1
    assert tri.on_hull.all()
    assert np.all(tri.voronoi_circumradii == UNBOUNDED)
    np.testing.assert_allclose(tri.inradii, [0.5, 0.5, 0.5])


def test_four_points_one_interior():
    pts = np.array([[0.0, 0.0], [3.0, -1.0], [0.0, 3.0], [-3.0, -1.0]])
    tri = triangulate(pts)
    assert tri.n_triangles == 3
    assert not tri.on_hull[0] and tri.on_hull[1:].all()
    # Cell of the origin is the triangle of the three circumcenters.
    expected = max(circumcircle(pts[0], pts[i], pts[j])[1] for i, j in ((1, 2), (2, 3), (3, 1)))
    assert voronoi_circumradius(tri, 0) == pytest.approx(expected)
    assert inradius(tri, 0) == pytest.approx(1.5)
    assert set(tri.voronoi_neighbors(0)) == {1, 2, 3}
    assert len(tri.voronoi_polygon(0)) == 3


def test_triangles_counter_clockwise():
    pts = np.random.default_rng(0).random((200, 2))
    tri = triangulate(pts)
    p = pts[tri.triangles]
    cross = (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1]) - (p[:, 1, 1] - p[:, 0, 1]) * (p[:, 2, 0] - p[:, 0, 0])
    assert np.all(cross > 0)


def test_hexagonal_cell():
    pts = hexagon_ring(2)
    tri = triangulate(pts)
    assert np.allclose(pts[0], 0)
    assert voronoi_circumradius(tri, 0) == pytest.approx(1 / math.sqrt(3), rel=1e-12)
    assert inradius(tri, 0) == pytest.approx(0.5, rel=1e-12)
    # Regular hexagon: circumradius / inradius = 2 / sqrt(3).
    assert voronoi_circumradius(tri, 0) / inradius(tri, 0) == pytest.approx(2 / math.sqrt(3), rel=1e-12)


def test_hull_vertices_unbounded():
    pts = np.random.default_rng(1).random((100, 2))
    tri = triangulate(pts)
    assert np.all(tri.voronoi_circumradii[tri.on_hull] == UNBOUNDED)
    assert np.all(np.isfinite(tri.voronoi_circumradii[~tri.on_hull]))
    with pytest.raises(DegenerateInput):
        tri.voronoi_polygon(int(np.flatnonzero(tri.on_hull)[0]))


def test_nearest_neighbour_against_brute_force():
    pts = np.random.default_rng(2).random((300, 2))
    d = np.hypot(*(pts[:, None, :] - pts[None, :, :]).transpose(2, 0, 1))
    np.fill_diagonal(d, np.inf)
    np.testing.assert_allclose(triangulate(pts).nearest_neighbor_distances, d.min(axis=1), rtol=1e-14)


def test_cells_against_half_plane_oracle():
    pts = np.random.default_rng(3).random((150, 2))
    tri = triangulate(pts)
    box = bounding_box(tri)
    for i in np.flatnonzero(~tri.on_hull):
        cell = brute_voronoi_cell(pts, i, box)
        assert polygon_inradius(cell, pts[i]) == pytest.approx(tri.inradius(i), abs=1e-9)
        assert polygon_circumradius(cell, pts[i]) == pytest.approx(tri.voronoi_circumradius(i), abs=1e-9)


def test_delaunay_cell_characteristic():
    pts = np.random.default_rng(4).random((50, 2))
    tri = triangulate(pts)
    for t in range(tri.n_triangles):
        c, r = delaunay_cell_characteristic(tri, t)
        d = np.hypot(*(pts[tri.triangles[t]] - c).T)
        np.testing.assert_allclose(d, r, rtol=1e-10)


def test_triangulation_passes_delaunay_oracle():
    pts = np.random.default_rng(5).random((300, 2))
    assert brute_delaunay_check(pts, triangulate(pts))


def test_grid_points_cocircular():
    # Every square of a lattice is cocircular; any diagonal choice is valid.
    g = np.stack(np.meshgrid(np.arange(6.0), np.arange(6.0)), -1).reshape(-1, 2)
    tri = triangulate(g)
    assert tri.n_triangles == 2 * 25
    assert brute_delaunay_check(g, tri)
    interior = ~tri.on_hull
    np.testing.assert_allclose(tri.voronoi_circumradii[interior], math.sqrt(0.5))


@pytest.mark.parametrize(
    "pts",
    [
        [[0, 0], [1, 1]],
        [[0, 0], [1, 1], [2, 2], [3, 3]],
        np.zeros((5, 2)),
        np.zeros((4, 3)),
    ],
)
def test_degenerate_inputs(pts):
    with pytest.raises(DegenerateInput):
        triangulate(pts)


def test_duplicate_points_marked_unused():
    pts = np.array([[0, 0], [1, 0], [0, 1], [1, 1], [1, 1], [0.4, 0.5]])
    tri = triangulate(pts)
    assert tri.used.sum() == 5
    assert np.all(tri.voronoi_circumradii[~tri.used] == UNBOUNDED)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_insertion_monotonicity(seed):
    # Adding points can only shrink Voronoi cells.
    gen = np.random.default_rng(seed)
    pts = gen.random((60, 2))
    extra = gen.random((20, 2))
    small, big = triangulate(pts), triangulate(np.vstack([pts, extra]))
    n = len(pts)
    assert np.all(big.inradii[:n] <= small.inradii + 1e-15)
    assert np.all(big.voronoi_circumradii[:n] <= small.voronoi_circumradii + 1e-12)


def test_interior_cells_unchanged_by_outside_points():
    gen = np.random.default_rng(6)
    pts = gen.uniform(-5, 5, (400, 2))
    guard = Rect.centered(5.0)
    tri = triangulate(pts)
    mask = tri.vertex_interior_mask(guard)
    assert mask.sum() > 100
    outside = gen.uniform(-8, 8, (2000, 2))
    outside = outside[~guard.contains(outside)]
    big = triangulate(np.vstack([pts, outside]))
    np.testing.assert_allclose(big.voronoi_circumradii[: len(pts)][mask], tri.voronoi_circumradii[mask], rtol=1e-12)
    tmask = tri.triangle_interior_mask(guard)
    big_tris = {tuple(sorted(t)) for t in big.triangles}
    assert all(tuple(sorted(t)) in big_tris for t in tri.triangles[tmask])


def test_interior_mask_nested_guards():
    pts = np.random.default_rng(7).uniform(-5, 5, (400, 2))
    tri = triangulate(pts)
    inner = tri.vertex_interior_mask(Rect.centered(3.0))
    outer = tri.vertex_interior_mask(Rect.centered(4.0))
    assert np.all(outer[inner])
    i = int(np.flatnonzero(inner)[0])
    assert is_interior(tri, i, Rect.centered(3.0))
    t = int(np.flatnonzero(tri.triangle_interior_mask(Rect.centered(3.0)))[0])
    assert is_interior(tri, t, Rect.centered(3.0), triangle=True)
    h = int(np.flatnonzero(tri.on_hull)[0])
    assert not is_interior(tri, h, Rect.centered(100.0))


def test_off_dump(tmp_path):
    pts = np.random.default_rng(8).random((10, 2))
    tri = triangulate(pts)
    path = tmp_path / "t.off"
    tri.to_off(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "OFF"
    assert lines[1] == f"10 {tri.n_triangles} 0"
    assert len(lines) == 2 + 10 + tri.n_triangles
    np.testing.assert_array_equal(np.array([l.split()[:2] for l in lines[2:12]], dtype=float), pts)
