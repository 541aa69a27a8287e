"""Closed-form constants, exceedance thresholds and the scanning-window geometry.

Every function takes ``log_rho`` (the natural log of the expected number of
nuclei in the observation window) rather than ``rho`` itself, since the values
of interest (``rho = e**100``) are awkward as literals and overflow quickly.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

from .exceptions import DomainError

__all__ = [
    "CharacteristicKind",
    "WindowGeometry",
    "ball_volume",
    "delaunay_intensity_constant",
    "delaunay_alpha",
    "delaunay_extremal_index",
    "threshold",
    "default_separating_scale",
    "window_geometry",
]


class CharacteristicKind(str, enum.Enum):
    INRADIUS_LARGE = "inradius-large"
    INRADIUS_SMALL = "inradius-small"
    CIRCUMRADIUS_VORONOI = "circumradius-voronoi"
    CIRCUMRADIUS_DELAUNAY = "circumradius-delaunay"

    @property
    def is_lower_tail(self) -> bool:
        """True when an exceedance means the characteristic falls *below* the threshold."""
        return self is CharacteristicKind.INRADIUS_SMALL

    @property
    def is_delaunay(self) -> bool:
        return self is CharacteristicKind.CIRCUMRADIUS_DELAUNAY

    @classmethod
    def parse(cls, value: "str | CharacteristicKind") -> "CharacteristicKind":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "-")
        for member in cls:
            if key in (member.value, member.name.lower().replace("_", "-")):
                return member
        raise ValueError(
            f"unknown characteristic {value!r}; choose from "
            + ", ".join(m.value for m in cls)
        )


def _log_ball_volume(d: int) -> float:
    return 0.5 * d * math.log(math.pi) - math.lgamma(0.5 * d + 1.0)


def _check_dim(d: int) -> int:
    if int(d) != d or d < 1:
        raise DomainError(f"dimension must be a positive integer, got {d!r}")
    return int(d)


def ball_volume(d: int) -> float:
    """Volume ``kappa_d`` of the d-dimensional unit ball."""
    return math.exp(_log_ball_volume(_check_dim(d)))


def _log_beta(d: int) -> float:
    return (
        math.log(d**3 + d**2)
        + math.lgamma(d * d / 2.0)
        + d * math.lgamma((d + 1) / 2.0)
        - math.lgamma((d * d + 1) / 2.0)
        - d * math.lgamma((d + 2) / 2.0)
        - (d + 1) * math.log(2.0)
        - (d - 1) / 2.0 * math.log(math.pi)
    )


def delaunay_intensity_constant(d: int) -> float:
    """Nucleus intensity ``beta_d`` giving a Poisson-Delaunay cell intensity of one.

    The Delaunay cells of a Poisson process of intensity ``gamma`` have
    intensity ``gamma / beta_d``.
    """
    return math.exp(_log_beta(_check_dim(d)))


def delaunay_alpha(d: int) -> float:
    d = _check_dim(d)
    log_inner = 0.5 * math.log(math.pi) + math.lgamma(d / 2.0 + 1.0) - math.lgamma((d + 1) / 2.0)
    return math.exp((d - 1) * log_inner - math.lgamma(d + 1.0))


def delaunay_extremal_index(d: int) -> float:
    """Extremal index of the maximal circumradius of a Poisson-Delaunay tessellation."""
    d = _check_dim(d)
    log_theta = (
        math.log(d**3 + d**2)
        + math.lgamma(d * d / 2.0)
        + math.lgamma((d + 1) / 2.0)
        - math.log(d)
        - math.lgamma((d * d + 1) / 2.0)
        - math.lgamma((d + 2) / 2.0)
        - (d + 1) * math.log(2.0)
    )
    return math.exp(log_theta)


def threshold(
    kind: "CharacteristicKind | str",
    d: int,
    log_rho: float,
    tau: float = 1.0,
    a: float = 4.0,
) -> float:
    """Threshold ``v_rho(tau)`` such that ``rho * P(g(C) exceeds v) -> tau``.

    For ``INRADIUS_SMALL`` the value is a lower threshold: a cell is an
    exceedance when its inradius is *below* it. ``a`` is the tail constant of
    the Voronoi circumradius (``P(pi R^2 > v) ~ a v exp(-v)``), only used for
    that kind and restricted to ``[2, 4]``.
    """
    kind = CharacteristicKind.parse(kind)
    d = _check_dim(d)
    if tau <= 0:
        raise DomainError(f"tau must be positive, got {tau}")
    log_tau = math.log(tau)
    log_kappa = _log_ball_volume(d)

    if kind is CharacteristicKind.INRADIUS_LARGE:
        arg = log_rho - log_tau
        if arg <= 0:
            raise DomainError("rho / tau must exceed 1 for the large-inradius threshold")
        return 0.5 * math.exp(-log_kappa / d) * arg ** (1.0 / d)

    if kind is CharacteristicKind.INRADIUS_SMALL:
        return 0.5 * math.exp((log_tau - log_kappa - log_rho) / d)

    if kind is CharacteristicKind.CIRCUMRADIUS_VORONOI:
        if d != 2:
            raise DomainError("the Voronoi circumradius threshold is only available for d = 2")
        if not 2.0 <= a <= 4.0:
            raise DomainError(f"tail constant a must lie in [2, 4], got {a}")
        if log_rho <= 0:
            raise DomainError("rho must exceed 1")
        arg = math.log(a) + log_rho + math.log(log_rho) - log_tau
        if arg <= 0:
            raise DomainError("a * rho * log(rho) / tau must exceed 1")
        return math.sqrt(arg / math.pi)

    # CIRCUMRADIUS_DELAUNAY
    log_beta = _log_beta(d)
    inner = log_beta + log_rho
    if inner <= 0:
        raise DomainError("beta_d * rho must exceed 1")
    arg = log_rho + (d - 1) * math.log(inner) - math.lgamma(d) - log_tau
    if arg <= 0:
        raise DomainError("the Delaunay circumradius log argument must exceed 1")
    return math.exp(-(log_kappa + log_beta) / d) * arg ** (1.0 / d)


def default_separating_scale(log_rho: float) -> float:
    """``q_rho = (log log rho) ** (log log rho)``."""
    ll = math.log(log_rho)
    return ll**ll


@dataclass(frozen=True)
class WindowGeometry:
    """Grid counts and square sizes built from ``rho`` and ``epsilon``.

    ``q_side`` is the side of the scanning square centred at the origin in
    which exceedances are counted; ``c_side`` the side of the smaller square
    used for the local-dependence argument.
    """

    log_rho: float
    epsilon: float
    d: int
    q_rho: float
    n_rho: int
    m_rho: int
    q_side: float
    c_side: float
    big_d: int

    @property
    def q_half(self) -> float:
        return 0.5 * self.q_side


def _floor_exp(log_value: float) -> int:
    if log_value < 0:
        return 0
    if log_value > 700:
        raise DomainError("rho too large for the window grid counts")
    return math.floor(math.exp(log_value))


def window_geometry(
    log_rho: float,
    epsilon: float = 0.01,
    d: int = 2,
    separating_scale: Callable[[float], float] = default_separating_scale,
) -> WindowGeometry:
    d = _check_dim(d)
    if epsilon <= 0:
        raise DomainError(f"epsilon must be positive, got {epsilon}")
    if log_rho <= math.e:
        raise DomainError("rho must exceed e**e so that log log rho > 1")
    q_rho = separating_scale(log_rho)
    if q_rho <= 0:
        raise DomainError("separating scale must be positive")
    log_root = log_rho / d
    log_shrink = -(1.0 + epsilon) / d * math.log(log_rho)
    n_rho = _floor_exp(log_shrink + log_root)
    m_rho = _floor_exp(log_shrink + log_root - math.log(q_rho) / d)
    if n_rho < 1 or m_rho < 1:
        raise DomainError("rho too small: grid counts vanish")
    big_d = 2 * (math.isqrt(d) + 1)
    q_side = math.exp(log_root - math.log(m_rho))
    c_side = 2.0 * big_d * math.exp(log_root - math.log(n_rho))
    return WindowGeometry(
        log_rho=log_rho,
        epsilon=epsilon,
        d=d,
        q_rho=q_rho,
        n_rho=n_rho,
        m_rho=m_rho,
        q_side=q_side,
        c_side=c_side,
        big_d=big_d,
    )
