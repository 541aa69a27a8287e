"""Brute-force references for tests. Quadratic; keep inputs to a few thousand points."""

from __future__ import annotations

from fractions import Fraction

import numpy as np
from scipy import stats

from .geometry import Rect, Triangulation
from .predicates import incircle_many, orient2d
from .samplers import as_generator


def clip_halfplane(poly: np.ndarray, normal, offset: float) -> np.ndarray:
    """Keep the part of convex ``poly`` where ``normal . y <= offset``."""
    if len(poly) == 0:
        return poly
    s = poly @ np.asarray(normal, dtype=float) - offset
    out = []
    n = len(poly)
    for j in range(n):
        p, q = poly[j], poly[(j + 1) % n]
        sp, sq = s[j], s[(j + 1) % n]
        if sp <= 0:
            out.append(p)
        if (sp < 0 < sq) or (sq < 0 < sp):
            t = sp / (sp - sq)
            out.append(p + t * (q - p))
    return np.array(out).reshape(-1, 2)


def brute_voronoi_cell(points, i: int, bbox: Rect) -> np.ndarray:
    """Voronoi cell of ``points[i]`` clipped to ``bbox``, counter-clockwise.

    Intersects the box with the bisector half-plane ``|y - x_i| <= |y - x_j|``
    of the other points in order of distance. A point farther than twice the
    current cell radius cannot cut the cell, which ends the scan.
    """
    pts = np.asarray(points, dtype=float)
    x = pts[i]
    poly = np.array(
        [[bbox.xmin, bbox.ymin], [bbox.xmax, bbox.ymin], [bbox.xmax, bbox.ymax], [bbox.xmin, bbox.ymax]]
    )
    dist = np.hypot(*(pts - x).T)
    for j in np.argsort(dist, kind="stable"):
        if j == i:
            continue
        if len(poly) == 0 or dist[j] > 2.0 * polygon_circumradius(poly, x):
            break
        y = pts[j]
        normal = y - x
        offset = 0.5 * (y @ y - x @ x)
        poly = clip_halfplane(poly, normal, offset)
    return poly


def polygon_inradius(poly: np.ndarray, center) -> float:
    """Distance from ``center`` to the boundary of convex ``poly`` containing it.

    Uses point-to-segment distances, so sliver edges left by clipping do not matter.
    """
    c = np.asarray(center, dtype=float)
    p = np.asarray(poly, dtype=float)
    q = np.roll(p, -1, axis=0)
    e = q - p
    len2 = np.einsum("ij,ij->i", e, e)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.clip(np.einsum("ij,ij->i", c - p, e) / len2, 0.0, 1.0)
    t = np.where(len2 > 0, t, 0.0)
    foot = p + t[:, None] * e
    return float(np.min(np.hypot(*(foot - c).T)))


def polygon_circumradius(poly: np.ndarray, center) -> float:
    return float(np.max(np.hypot(*(np.asarray(poly) - np.asarray(center)).T)))


def polygon_area(poly: np.ndarray) -> float:
    x, y = np.asarray(poly, dtype=float).T
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def convex_hull(points) -> np.ndarray:
    """Andrew's monotone chain with exact orientation tests."""
    pts = sorted(map(tuple, np.asarray(points, dtype=float)))
    if len(pts) < 3:
        return np.array(pts)

    def half(seq):
        chain = []
        for p in seq:
            while len(chain) >= 2 and orient2d(chain[-2], chain[-1], p) <= 0:
                chain.pop()
            chain.append(p)
        return chain

    lower, upper = half(pts), half(reversed(pts))
    return np.array(lower[:-1] + upper[:-1])


def _exact_area2(a, b, c) -> Fraction:
    ax, ay = Fraction(a[0]), Fraction(a[1])
    return (Fraction(b[0]) - ax) * (Fraction(c[1]) - ay) - (Fraction(b[1]) - ay) * (Fraction(c[0]) - ax)


def brute_delaunay_check(points, triangulation) -> bool:
    """True iff the triangles tile the convex hull and no vertex lies strictly
    inside any triangle's circumcircle.

    ``triangulation`` is a :class:`Triangulation` or an ``(m, 3)`` index array.
    Cocircular points on the circle are accepted, matching any consistent
    tie-breaking.
    """
    pts = np.asarray(points, dtype=float)
    tris = triangulation.triangles if isinstance(triangulation, Triangulation) else np.asarray(triangulation)
    if len(tris) == 0:
        return False
    area2 = Fraction(0)
    for a, b, c in tris:
        o = orient2d(pts[a], pts[b], pts[c])
        if o == 0:
            return False
        if o < 0:
            b, c = c, b
        area2 += _exact_area2(pts[a], pts[b], pts[c])
        inside = incircle_many(pts[a], pts[b], pts[c], pts)
        inside[[a, b, c]] = 0
        if np.any(inside > 0):
            return False
    hull = convex_hull(pts)
    hull2 = sum(
        (_exact_area2(hull[0], hull[j], hull[j + 1]) for j in range(1, len(hull) - 1)), Fraction(0)
    )
    return area2 == hull2


def tail_ks_check(sampler, analytic_survival, n: int = 100_000, level: float = 0.01, rng=None) -> bool:
    """Two-sided Kolmogorov-Smirnov test of ``sampler(gen, n)`` against ``1 - analytic_survival``.

    Returns True when the test does *not* reject at ``level``.
    """
    if n < 1000:
        raise ValueError("use at least 1000 draws")
    gen = as_generator(0 if rng is None else rng)
    draws = np.asarray(sampler(gen, n), dtype=float)
    result = stats.kstest(draws, lambda x: 1.0 - analytic_survival(np.asarray(x, dtype=float)))
    return bool(result.pvalue > level)
