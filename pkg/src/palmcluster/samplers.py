"""Random sources for the Palm samplers.

Truncated tails are exposed twice: as a deterministic quantile function of a
uniform (or exponential) variate, which is what the tests pin down, and as a
sampler drawing that variate from a :class:`numpy.random.Generator`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .exceptions import ConvergenceError
from .geometry import Rect

FOUR_PI = 4.0 * math.pi
#: Area of the equilateral triangle inscribed in the unit circle.
MAX_INSCRIBED_AREA = 3.0 * math.sqrt(3.0) / 4.0
NEWTON_TOL = 1e-12
NEWTON_MAXITER = 200


@dataclass(frozen=True)
class Rng:
    """Counter-based random stream ``(master_seed, stream_index)``.

    Streams are Philox generators keyed through :class:`numpy.random.SeedSequence`,
    so replicate ``i`` draws the same numbers whatever other replicates exist
    and in whatever order they run.
    """

    master_seed: int
    stream_index: int

    def generator(self, *substream: int) -> np.random.Generator:
        seq = np.random.SeedSequence(self.master_seed, spawn_key=(self.stream_index, *substream))
        return np.random.Generator(np.random.Philox(seq))


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, Rng):
        return rng.generator()
    return np.random.default_rng(rng)


@dataclass(frozen=True)
class ExclusionBall:
    center: tuple[float, float]
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"exclusion radius must be positive, got {self.radius}")

    def strictly_inside(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        dx = pts[:, 0] - self.center[0]
        dy = pts[:, 1] - self.center[1]
        return dx * dx + dy * dy < self.radius * self.radius


def sample_poisson(window: Rect, intensity: float, rng) -> np.ndarray:
    """Homogeneous Poisson process on ``window``; returns an ``(n, 2)`` array."""
    if intensity <= 0:
        raise ValueError("intensity must be positive")
    gen = as_generator(rng)
    n = gen.poisson(intensity * window.area)
    u = gen.random((n, 2))
    u[:, 0] = window.xmin + window.width * u[:, 0]
    u[:, 1] = window.ymin + window.height * u[:, 1]
    return u


def sample_poisson_outside(
    window: Rect, balls: Sequence[ExclusionBall], intensity: float, rng
) -> np.ndarray:
    """Poisson process on ``window`` with the open ``balls`` removed (independent thinning)."""
    pts = sample_poisson(window, intensity, rng)
    if not balls:
        return pts
    keep = np.ones(len(pts), dtype=bool)
    for ball in balls:
        keep &= ~ball.strictly_inside(pts)
    return pts[keep]


# -- inradius ---------------------------------------------------------------


def inradius_tail_quantile(v0: float, e):
    """Inradius given it exceeds ``v0``, from a standard exponential ``e``.

    ``P(r > v) = exp(-4 pi v^2)`` gives ``r = sqrt(v0^2 + e / (4 pi))``.
    """
    return np.sqrt(v0 * v0 + np.asarray(e, dtype=float) / FOUR_PI)


def sample_inradius_tail(v0: float, rng, size=None):
    if v0 < 0:
        raise ValueError("v0 must be non-negative")
    gen = as_generator(rng)
    e = gen.standard_exponential(size)
    # An exact zero would sit on the boundary of the support.
    e = np.where(e > 0, e, np.finfo(float).tiny)
    r = inradius_tail_quantile(v0, e)
    return float(r) if size is None else r


def inradius_lower_quantile(v0: float, u):
    """Inradius given it is below ``v0``, by inverting ``1 - exp(-4 pi r^2)``."""
    mass = -math.expm1(-FOUR_PI * v0 * v0)
    return np.sqrt(-np.log1p(-np.asarray(u, dtype=float) * mass) / FOUR_PI)


def sample_inradius_lower(v0: float, rng, size=None):
    if v0 <= 0:
        raise ValueError("v0 must be positive")
    gen = as_generator(rng)
    u = gen.random(size)
    r = np.minimum(inradius_lower_quantile(v0, u), np.nextafter(v0, 0.0))
    return float(r) if size is None else r


# -- numeric tail inversion ---------------------------------------------------


def _invert_decreasing(f, fprime, lo, target_log):
    """Solve ``f(w) = target_log`` for ``w >= lo`` where ``f`` is a concave,
    decreasing log-survival with ``f(lo) = 0 >= target_log``.

    Safeguarded Newton: iterates are kept inside a bracket and replaced by the
    bisection midpoint whenever a Newton step would leave it.
    """
    lo = np.array(lo, dtype=float)
    target_log = np.array(target_log, dtype=float)
    lo, target_log = np.broadcast_arrays(lo, target_log)
    lo, target_log = lo.copy(), target_log.copy()
    hi = lo + 1.0
    for _ in range(NEWTON_MAXITER):
        short = f(hi) > target_log
        if not short.any():
            break
        hi = np.where(short, lo + 2.0 * (hi - lo), hi)
    else:
        raise ConvergenceError("could not bracket the tail quantile")

    start = lo.copy()
    w = lo.copy()
    done = target_log >= 0
    for _ in range(NEWTON_MAXITER):
        g = f(w) - target_log
        lo = np.where(g > 0, w, lo)
        hi = np.where(g <= 0, w, hi)
        dg = fprime(w)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = w - g / dg
        bad = ~np.isfinite(step) | (step <= lo) | (step >= hi)
        new = np.where(g == 0, w, np.where(bad, 0.5 * (lo + hi), step))
        # Relative to the excess over the start: the survival depends on w - w0.
        conv = done | (np.abs(new - w) <= NEWTON_TOL * np.maximum(1.0, np.abs(w - start)))
        w = np.where(done, w, new)
        done = conv
        if done.all():
            return w
    raise ConvergenceError(f"tail inversion did not converge in {NEWTON_MAXITER} iterations")


def weighted_exp_log_survival(w, w0):
    """``log P(W > w | W > w0)`` for the tail ``P(W > w) ~ b w exp(-w)``."""
    w = np.asarray(w, dtype=float)
    return np.log(w / w0) - (w - w0)


def weighted_exp_tail_quantile(w0: float, u):
    """``W >= w0`` with ``w exp(-w) = u * w0 exp(-w0)``; ``u`` in ``(0, 1]``."""
    if w0 <= 1:
        raise ValueError("w0 must exceed 1 for the tail to be decreasing")
    u = np.asarray(u, dtype=float)
    w = _invert_decreasing(
        lambda w: weighted_exp_log_survival(w, w0),
        lambda w: 1.0 / w - 1.0,
        np.full(u.shape, w0),
        np.log(u),
    )
    return w if w.ndim else float(w)


def sample_weighted_exp_tail(w0: float, rng, size=None):
    gen = as_generator(rng)
    u = 1.0 - gen.random(size)
    return weighted_exp_tail_quantile(w0, u)


def gamma_log_survival(w, w0):
    """``log P(W > w | W > w0)`` for ``W ~ Gamma(shape 2, rate 1/2)``."""
    w = np.asarray(w, dtype=float)
    return -0.5 * (w - w0) + np.log1p(0.5 * w) - math.log1p(0.5 * w0)


def gamma_tail_quantile(w0: float, u):
    if w0 < 0:
        raise ValueError("w0 must be non-negative")
    u = np.asarray(u, dtype=float)
    w = _invert_decreasing(
        lambda w: gamma_log_survival(w, w0),
        lambda w: -0.5 + 0.5 / (1.0 + 0.5 * w),
        np.full(u.shape, w0),
        np.log(u),
    )
    return w if w.ndim else float(w)


def sample_gamma_tail(w0: float, rng, size=None):
    gen = as_generator(rng)
    u = 1.0 - gen.random(size)
    return gamma_tail_quantile(w0, u)


# -- directions -----------------------------------------------------------------


def sample_unit_vector(rng, size=None) -> np.ndarray:
    gen = as_generator(rng)
    phi = gen.uniform(0.0, 2.0 * math.pi, size)
    return np.stack([np.cos(phi), np.sin(phi)], axis=-1)


def triangle_area(u: np.ndarray) -> np.ndarray:
    """Area of the triangle(s) with vertices ``u[..., 0:3, :]``."""
    u = np.asarray(u, dtype=float)
    a, b, c = u[..., 0, :], u[..., 1, :], u[..., 2, :]
    cross = (b[..., 0] - a[..., 0]) * (c[..., 1] - a[..., 1]) - (b[..., 1] - a[..., 1]) * (
        c[..., 0] - a[..., 0]
    )
    return 0.5 * np.abs(cross)


def sample_area_weighted_triangle(rng) -> np.ndarray:
    """Three unit vectors with joint density proportional to their triangle's area.

    Rejection from independent uniform directions; the equilateral triangle
    bounds the area, so the acceptance test is exact.
    """
    gen = as_generator(rng)
    while True:
        u = sample_unit_vector(gen, 3)
        if gen.random() * MAX_INSCRIBED_AREA < triangle_area(u):
            return u
