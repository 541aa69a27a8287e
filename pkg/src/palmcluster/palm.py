"""Conditioned configurations: the point process seen from a typical exceedance.

Each sampler returns a :class:`PalmSample` whose marked points come first in
``points`` (index 0 is the origin for the Voronoi kinds; indices 0..2 are the
conditioned triangle for the Delaunay kind), followed by the Poisson points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import CharacteristicKind, delaunay_intensity_constant
from .exceptions import WindowTooSmall
from .geometry import Rect
from .samplers import (
    ExclusionBall,
    as_generator,
    sample_area_weighted_triangle,
    sample_gamma_tail,
    sample_inradius_lower,
    sample_inradius_tail,
    sample_poisson_outside,
    sample_unit_vector,
    sample_weighted_exp_tail,
)

DELAUNAY_INTENSITY = delaunay_intensity_constant(2)


@dataclass
class PalmSample:
    points: np.ndarray
    kind: CharacteristicKind
    conditioning_radius: float
    marked: tuple[int, ...]
    exclusion: ExclusionBall
    window: Rect
    intensity: float = 1.0
    extra: dict = field(default_factory=dict)

    @property
    def n_points(self) -> int:
        return len(self.points)

    def dump(self, path) -> None:
        """Plain-text dump: header lines starting with ``#`` then ``x y marked`` rows."""
        with open(path, "w", encoding="ascii") as fh:
            fh.write(f"# kind {self.kind.value}\n")
            fh.write(f"# conditioning_radius {float(self.conditioning_radius)!r}\n")
            c = self.exclusion.center
            fh.write(f"# exclusion {float(c[0])!r} {float(c[1])!r} {float(self.exclusion.radius)!r}\n")
            fh.write("# window " + " ".join(repr(float(v)) for v in self.window.as_tuple()) + "\n")
            fh.write(f"# intensity {float(self.intensity)!r}\n")
            marked = set(self.marked)
            for i, (x, y) in enumerate(self.points):
                fh.write(f"{float(x)!r} {float(y)!r} {int(i in marked)}\n")


def _require_fits(window: Rect, ball: ExclusionBall, slack: float = 1.0) -> None:
    extent = Rect(
        ball.center[0] - ball.radius - slack,
        ball.center[1] - ball.radius - slack,
        ball.center[0] + ball.radius + slack,
        ball.center[1] + ball.radius + slack,
    )
    if not window.contains_rect(extent):
        raise WindowTooSmall(
            f"exclusion ball of radius {ball.radius:.4g} at {ball.center} does not fit in {window}"
        )


def _inradius_configuration(r, kind, window, gen, **extra) -> PalmSample:
    ball = ExclusionBall((0.0, 0.0), 2.0 * r)
    _require_fits(window, ball)
    partner = 2.0 * r * sample_unit_vector(gen)
    poisson = sample_poisson_outside(window, [ball], 1.0, gen)
    pts = np.vstack([[0.0, 0.0], partner, poisson])
    return PalmSample(pts, kind, float(r), (0, 1), ball, window, 1.0, dict(extra))


def palm_inradius_large(v0: float, window: Rect, rng) -> PalmSample:
    """Nuclei given the typical inradius exceeds ``v0``.

    Given the inradius ``r``, the configuration is a Poisson process outside
    ``B(0, 2r)``, the origin, and one point uniform on the circle of radius ``2r``.
    """
    gen = as_generator(rng)
    r = sample_inradius_tail(v0, gen)
    return _inradius_configuration(r, CharacteristicKind.INRADIUS_LARGE, window, gen)


def palm_inradius_small(v0: float, window: Rect, rng) -> PalmSample:
    gen = as_generator(rng)
    r = sample_inradius_lower(v0, gen)
    return _inradius_configuration(r, CharacteristicKind.INRADIUS_SMALL, window, gen)


def palm_circumradius_voronoi(v0: float, window: Rect, rng) -> PalmSample:
    """Nuclei given the typical Voronoi circumradius exceeds ``v0``.

    ``pi R^2`` is drawn from the conditional tail ``w exp(-w)`` above
    ``pi v0^2``, which does not involve the unknown tail constant. The empty
    disk of radius ``R`` through the origin is centred on the positive x-axis.
    """
    w0 = math.pi * v0 * v0
    if w0 <= 1:
        raise ValueError("v0 must exceed 1/sqrt(pi)")
    gen = as_generator(rng)
    w = sample_weighted_exp_tail(w0, gen)
    big_r = math.sqrt(w / math.pi)
    ball = ExclusionBall((big_r, 0.0), big_r)
    _require_fits(window, ball)
    poisson = sample_poisson_outside(window, [ball], 1.0, gen)
    pts = np.vstack([[0.0, 0.0], poisson])
    return PalmSample(pts, CharacteristicKind.CIRCUMRADIUS_VORONOI, big_r, (0,), ball, window, 1.0)


def palm_delaunay_circumradius(v0: float, window: Rect, rng) -> PalmSample:
    """Nuclei given the typical Delaunay circumradius exceeds ``v0``.

    ``pi R^2`` follows the Gamma(2, 1/2) tail above ``pi v0^2``; the three
    vertices sit at ``R * U`` with area-weighted directions ``U``; the
    remaining nuclei form a Poisson process of intensity ``beta_2 = 1/2``
    outside ``B(0, R)``. The conditioned cell has circumcenter 0.
    """
    if v0 <= 0:
        raise ValueError("v0 must be positive")
    gen = as_generator(rng)
    w = sample_gamma_tail(math.pi * v0 * v0, gen)
    big_r = math.sqrt(w / math.pi)
    ball = ExclusionBall((0.0, 0.0), big_r)
    _require_fits(window, ball)
    verts = big_r * sample_area_weighted_triangle(gen)
    poisson = sample_poisson_outside(window, [ball], DELAUNAY_INTENSITY, gen)
    pts = np.vstack([verts, poisson])
    return PalmSample(
        pts,
        CharacteristicKind.CIRCUMRADIUS_DELAUNAY,
        big_r,
        (0, 1, 2),
        ball,
        window,
        DELAUNAY_INTENSITY,
    )


_SAMPLERS = {
    CharacteristicKind.INRADIUS_LARGE: palm_inradius_large,
    CharacteristicKind.INRADIUS_SMALL: palm_inradius_small,
    CharacteristicKind.CIRCUMRADIUS_VORONOI: palm_circumradius_voronoi,
    CharacteristicKind.CIRCUMRADIUS_DELAUNAY: palm_delaunay_circumradius,
}


def palm_sample(kind, v0: float, window: Rect, rng) -> PalmSample:
    return _SAMPLERS[CharacteristicKind.parse(kind)](v0, window, rng)
