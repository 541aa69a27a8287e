"""Adaptive orientation and in-circle predicates.

A double-precision evaluation is trusted when it clears Shewchuk's static
error bound; otherwise the determinant is recomputed exactly with
:class:`fractions.Fraction` (every finite double is an exact rational).
Exact zeros are resolved by a symbolic perturbation keyed on point indices
when indices are supplied.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

_EPS = np.finfo(float).eps / 2.0
_CCW_BOUND = (3.0 + 16.0 * _EPS) * _EPS
_ICC_BOUND = (10.0 + 96.0 * _EPS) * _EPS


def _orient_exact(a, b, c) -> int:
    ax, ay = Fraction(a[0]), Fraction(a[1])
    det = (Fraction(b[0]) - ax) * (Fraction(c[1]) - ay) - (Fraction(b[1]) - ay) * (Fraction(c[0]) - ax)
    return (det > 0) - (det < 0)


def orient2d(a, b, c) -> int:
    """Sign of twice the signed area of ``(a, b, c)``: +1 counter-clockwise, -1 clockwise, 0 collinear."""
    detleft = (a[0] - c[0]) * (b[1] - c[1])
    detright = (a[1] - c[1]) * (b[0] - c[0])
    det = detleft - detright
    bound = _CCW_BOUND * (abs(detleft) + abs(detright))
    if det > bound:
        return 1
    if -det > bound:
        return -1
    return _orient_exact(a, b, c)


def _incircle_exact(a, b, c, d) -> int:
    dx, dy = Fraction(d[0]), Fraction(d[1])
    rows = []
    for p in (a, b, c):
        px, py = Fraction(p[0]) - dx, Fraction(p[1]) - dy
        rows.append((px, py, px * px + py * py))
    (a0, a1, a2), (b0, b1, b2), (c0, c1, c2) = rows
    det = a2 * (b0 * c1 - b1 * c0) - b2 * (a0 * c1 - a1 * c0) + c2 * (a0 * b1 - a1 * b0)
    return (det > 0) - (det < 0)


def incircle(a, b, c, d) -> int:
    """+1 if ``d`` is strictly inside the circle through counter-clockwise ``a, b, c``,
    -1 if strictly outside, 0 if cocircular."""
    adx, ady = a[0] - d[0], a[1] - d[1]
    bdx, bdy = b[0] - d[0], b[1] - d[1]
    cdx, cdy = c[0] - d[0], c[1] - d[1]
    bdxcdy, cdxbdy = bdx * cdy, cdx * bdy
    cdxady, adxcdy = cdx * ady, adx * cdy
    adxbdy, bdxady = adx * bdy, bdx * ady
    alift = adx * adx + ady * ady
    blift = bdx * bdx + bdy * bdy
    clift = cdx * cdx + cdy * cdy
    det = alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy) + clift * (adxbdy - bdxady)
    permanent = (
        (abs(bdxcdy) + abs(cdxbdy)) * alift
        + (abs(cdxady) + abs(adxcdy)) * blift
        + (abs(adxbdy) + abs(bdxady)) * clift
    )
    bound = _ICC_BOUND * permanent
    if det > bound:
        return 1
    if -det > bound:
        return -1
    return _incircle_exact(a, b, c, d)


def incircle_perturbed(a, b, c, d, indices) -> int:
    """In-circle test that never returns 0.

    Cocircular ties are broken by lifting each point by ``delta ** index``;
    the point with the largest index dominates, so ``d`` is declared outside
    when it was inserted after ``a, b, c`` and inside otherwise.
    """
    s = incircle(a, b, c, d)
    if s != 0:
        return s
    ia, ib, ic, id_ = indices
    return -1 if id_ > max(ia, ib, ic) else 1


def incircle_many(a, b, c, pts: np.ndarray) -> np.ndarray:
    """Vectorised :func:`incircle` of many query points against one triangle.

    Uncertain entries fall back to the exact scalar predicate.
    """
    pts = np.asarray(pts, dtype=float)
    adx, ady = a[0] - pts[:, 0], a[1] - pts[:, 1]
    bdx, bdy = b[0] - pts[:, 0], b[1] - pts[:, 1]
    cdx, cdy = c[0] - pts[:, 0], c[1] - pts[:, 1]
    bdxcdy, cdxbdy = bdx * cdy, cdx * bdy
    cdxady, adxcdy = cdx * ady, adx * cdy
    adxbdy, bdxady = adx * bdy, bdx * ady
    alift = adx * adx + ady * ady
    blift = bdx * bdx + bdy * bdy
    clift = cdx * cdx + cdy * cdy
    det = alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy) + clift * (adxbdy - bdxady)
    permanent = (
        (np.abs(bdxcdy) + np.abs(cdxbdy)) * alift
        + (np.abs(cdxady) + np.abs(adxcdy)) * blift
        + (np.abs(adxbdy) + np.abs(bdxady)) * clift
    )
    out = np.sign(det).astype(int)
    unsure = np.abs(det) <= _ICC_BOUND * permanent
    for j in np.flatnonzero(unsure):
        out[j] = _incircle_exact(a, b, c, pts[j])
    return out
