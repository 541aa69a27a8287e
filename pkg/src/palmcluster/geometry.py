"""Planar Delaunay triangulation with dual Voronoi queries.

The triangulation itself is delegated to Qhull through :mod:`scipy.spatial`.
Everything the exceedance counting needs is derived here in vectorised form:
triangle circumcircles, per-nucleus inradius and Voronoi circumradius, and
the interior tests that tell whether a cell could change if the point
process were extended beyond the simulated region.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.spatial import Delaunay, QhullError

from .exceptions import DegenerateInput
from .predicates import orient2d

#: Voronoi circumradius of a cell that is unbounded within the point set.
UNBOUNDED = math.inf


@dataclass(frozen=True)
class Rect:
    """Closed axis-aligned rectangle ``[xmin, xmax] x [ymin, ymax]``."""

    xmin: float
    ymin: float
    xmax: float
    ymax: float

    def __post_init__(self):
        if not (self.xmax > self.xmin and self.ymax > self.ymin):
            raise DegenerateInput(f"degenerate rectangle {self}")

    @classmethod
    def centered(cls, half_width: float, half_height: float | None = None) -> "Rect":
        hh = half_width if half_height is None else half_height
        return cls(-half_width, -hh, half_width, hh)

    @property
    def width(self) -> float:
        return self.xmax - self.xmin

    @property
    def height(self) -> float:
        return self.ymax - self.ymin

    @property
    def area(self) -> float:
        return self.width * self.height

    def pad(self, margin: float) -> "Rect":
        return Rect(self.xmin - margin, self.ymin - margin, self.xmax + margin, self.ymax + margin)

    def intersect(self, other: "Rect") -> "Rect | None":
        xmin, ymin = max(self.xmin, other.xmin), max(self.ymin, other.ymin)
        xmax, ymax = min(self.xmax, other.xmax), min(self.ymax, other.ymax)
        if xmax <= xmin or ymax <= ymin:
            return None
        return Rect(xmin, ymin, xmax, ymax)

    def contains(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        return (
            (pts[:, 0] >= self.xmin)
            & (pts[:, 0] <= self.xmax)
            & (pts[:, 1] >= self.ymin)
            & (pts[:, 1] <= self.ymax)
        )

    def boundary_distance(self, pts) -> np.ndarray:
        """Distance from each point to the complement of the rectangle (negative outside)."""
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        return np.minimum.reduce(
            [
                pts[:, 0] - self.xmin,
                self.xmax - pts[:, 0],
                pts[:, 1] - self.ymin,
                self.ymax - pts[:, 1],
            ]
        )

    def contains_disks(self, centers, radii) -> np.ndarray:
        return self.boundary_distance(centers) >= np.asarray(radii, dtype=float)

    def contains_rect(self, other: "Rect") -> bool:
        return (
            other.xmin >= self.xmin
            and other.ymin >= self.ymin
            and other.xmax <= self.xmax
            and other.ymax <= self.ymax
        )

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.xmin, self.ymin, self.xmax, self.ymax)


def circumcircle(a, b, c) -> tuple[np.ndarray, float]:
    """Center and radius of the circle through three non-collinear points."""
    a, b, c = (np.asarray(p, dtype=float) for p in (a, b, c))
    if orient2d(a, b, c) == 0:
        raise DegenerateInput("collinear points have no circumcircle")
    centers, radii = _circumcircles(a[None], b[None], c[None])
    return centers[0], float(radii[0])


def _circumcircles(a: np.ndarray, b: np.ndarray, c: np.ndarray):
    # Coordinates relative to a keep the cancellation small.
    bx, by = b[:, 0] - a[:, 0], b[:, 1] - a[:, 1]
    cx, cy = c[:, 0] - a[:, 0], c[:, 1] - a[:, 1]
    denom = 2.0 * (bx * cy - by * cx)
    b2 = bx * bx + by * by
    c2 = cx * cx + cy * cy
    with np.errstate(divide="ignore", invalid="ignore"):
        ux = (cy * b2 - by * c2) / denom
        uy = (bx * c2 - cx * b2) / denom
    centers = np.column_stack([a[:, 0] + ux, a[:, 1] + uy])
    radii = np.hypot(ux, uy)
    return centers, radii


class Triangulation:
    """Delaunay triangulation of a planar point set.

    Parameters
    ----------
    points : array_like of shape (n, 2)
        Nuclei. At least three, not all collinear.

    Attributes
    ----------
    vertices : ndarray of shape (n, 2)
    triangles : ndarray of shape (m, 3)
        Vertex indices, counter-clockwise.
    neighbors : ndarray of shape (m, 3)
        ``neighbors[t, j]`` is the triangle opposite vertex ``j`` of ``t``, or -1.
    on_hull : ndarray of shape (n,) of bool
        Vertices of the convex hull; their Voronoi cells are unbounded.
    """

    def __init__(self, points):
        pts = np.ascontiguousarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise DegenerateInput("points must have shape (n, 2)")
        if len(pts) < 3:
            raise DegenerateInput(f"need at least 3 points, got {len(pts)}")
        try:
            dt = Delaunay(pts)
        except QhullError as exc:
            raise DegenerateInput(f"cannot triangulate: {exc.args[0].splitlines()[0]}") from exc
        self.vertices = pts
        tris = dt.simplices.astype(np.intp)
        nbrs = dt.neighbors.astype(np.intp)
        # Qhull does not promise an orientation; make every triangle counter-clockwise.
        p = pts[tris]
        cw = (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1]) - (p[:, 1, 1] - p[:, 0, 1]) * (
            p[:, 2, 0] - p[:, 0, 0]
        ) < 0
        tris[cw] = tris[cw][:, [0, 2, 1]]
        nbrs[cw] = nbrs[cw][:, [0, 2, 1]]
        self.triangles = tris
        self.neighbors = nbrs
        self.on_hull = np.zeros(len(pts), dtype=bool)
        self.on_hull[np.unique(dt.convex_hull)] = True
        # Points Qhull dropped as duplicates/coplanar own no triangle.
        self.used = np.zeros(len(pts), dtype=bool)
        self.used[tris.ravel()] = True

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @cached_property
    def _circles(self):
        p = self.vertices[self.triangles]
        return _circumcircles(p[:, 0], p[:, 1], p[:, 2])

    @property
    def circumcenters(self) -> np.ndarray:
        return self._circles[0]

    @property
    def circumradii(self) -> np.ndarray:
        return self._circles[1]

    @cached_property
    def _vertex_star(self) -> tuple[np.ndarray, np.ndarray]:
        flat = self.triangles.ravel()
        order = np.argsort(flat, kind="stable")
        tri_of = order // 3
        ptr = np.zeros(self.n_vertices + 1, dtype=np.intp)
        np.add.at(ptr, flat + 1, 1)
        return np.cumsum(ptr), tri_of

    def incident_triangles(self, i: int) -> np.ndarray:
        ptr, tri_of = self._vertex_star
        return tri_of[ptr[i] : ptr[i + 1]]

    @cached_property
    def edges(self) -> np.ndarray:
        t = self.triangles
        e = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        e.sort(axis=1)
        return np.unique(e, axis=0)

    def voronoi_neighbors(self, i: int) -> np.ndarray:
        tri = self.triangles[self.incident_triangles(i)]
        nb = np.unique(tri)
        return nb[nb != i]

    @cached_property
    def nearest_neighbor_distances(self) -> np.ndarray:
        """Distance from every vertex to its nearest other vertex.

        The nearest neighbour of a point is always a Delaunay neighbour.
        """
        e = self.edges
        lengths = np.hypot(*(self.vertices[e[:, 0]] - self.vertices[e[:, 1]]).T)
        nn = np.full(self.n_vertices, np.inf)
        np.minimum.at(nn, e[:, 0], lengths)
        np.minimum.at(nn, e[:, 1], lengths)
        return nn

    @cached_property
    def inradii(self) -> np.ndarray:
        return 0.5 * self.nearest_neighbor_distances

    @cached_property
    def voronoi_circumradii(self) -> np.ndarray:
        """Voronoi circumradius of every cell, :data:`UNBOUNDED` on the hull.

        Every Voronoi vertex of a cell is the circumcenter of an incident
        Delaunay triangle, at distance equal to that triangle's circumradius.
        """
        out = np.zeros(self.n_vertices)
        r = np.repeat(self.circumradii, 3)
        np.maximum.at(out, self.triangles.ravel(), r)
        out[self.on_hull | ~self.used] = UNBOUNDED
        return out

    def inradius(self, i: int) -> float:
        return float(self.inradii[i])

    def voronoi_circumradius(self, i: int) -> float:
        return float(self.voronoi_circumradii[i])

    def voronoi_polygon(self, i: int) -> np.ndarray:
        """Vertices of the bounded Voronoi cell of ``i`` in counter-clockwise order."""
        if self.on_hull[i]:
            raise DegenerateInput(f"cell {i} is unbounded")
        c = self.circumcenters[self.incident_triangles(i)]
        ang = np.arctan2(c[:, 1] - self.vertices[i, 1], c[:, 0] - self.vertices[i, 0])
        return c[np.argsort(ang)]

    def delaunay_cell_characteristic(self, t: int) -> tuple[np.ndarray, float]:
        """Nucleus (circumcenter) and circumradius of Delaunay triangle ``t``."""
        return self.circumcenters[t].copy(), float(self.circumradii[t])

    def vertex_interior_mask(self, guard: Rect) -> np.ndarray:
        """Cells whose incident circumdisks all lie inside ``guard``.

        Such a cell is a true cell of any point process that agrees with the
        vertices inside ``guard``: each incident triangle keeps an empty
        circumdisk, and the triangles close up around the nucleus.
        """
        ok_tri = guard.contains_disks(self.circumcenters, self.circumradii)
        bad = np.zeros(self.n_vertices, dtype=bool)
        np.logical_or.at(bad, self.triangles.ravel(), np.repeat(~ok_tri, 3))
        return ~bad & ~self.on_hull & self.used

    def triangle_interior_mask(self, guard: Rect) -> np.ndarray:
        return guard.contains_disks(self.circumcenters, self.circumradii)

    def is_interior(self, index: int, guard: Rect, *, triangle: bool = False) -> bool:
        """Whether the Voronoi cell of vertex ``index`` (or triangle ``index``) is unaffected
        by points outside ``guard``."""
        if triangle:
            c, r = self.circumcenters[index], self.circumradii[index]
            return bool(guard.contains_disks(c, r)[0])
        if self.on_hull[index] or not self.used[index]:
            return False
        tris = self.incident_triangles(index)
        return bool(np.all(guard.contains_disks(self.circumcenters[tris], self.circumradii[tris])))

    def to_off(self, path) -> None:
        """Write vertices and triangles in OFF format (z = 0)."""
        with open(path, "w", encoding="ascii") as fh:
            fh.write("OFF\n")
            fh.write(f"{self.n_vertices} {self.n_triangles} 0\n")
            for x, y in self.vertices:
                fh.write(f"{float(x)!r} {float(y)!r} 0.0\n")
            for a, b, c in self.triangles:
                fh.write(f"3 {a} {b} {c}\n")


def triangulate(points) -> Triangulation:
    return Triangulation(points)


def inradius(tri: Triangulation, i: int) -> float:
    return tri.inradius(i)


def voronoi_circumradius(tri: Triangulation, i: int) -> float:
    return tri.voronoi_circumradius(i)


def delaunay_cell_characteristic(tri: Triangulation, t: int) -> tuple[np.ndarray, float]:
    return tri.delaunay_cell_characteristic(t)


def is_interior(tri: Triangulation, index: int, guard_window: Rect, *, triangle: bool = False) -> bool:
    return tri.is_interior(index, guard_window, triangle=triangle)
