import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from palmcluster.constants import (
    CharacteristicKind as K,
    ball_volume,
    delaunay_alpha,
    delaunay_extremal_index,
    delaunay_intensity_constant,
    threshold,
    window_geometry,
)
from palmcluster.exceptions import DomainError

# beta_3 frozen from an mpmath evaluation at 40 digits.
BETA_3 = 0.14776005947840925


@pytest.mark.parametrize("d, expected", [(1, 2.0), (2, math.pi), (3, 4 * math.pi / 3)])
def test_ball_volume(d, expected):
    assert ball_volume(d) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("d, expected", [(1, 1.0), (2, 0.5), (3, BETA_3)])
def test_delaunay_intensity_constant(d, expected):
    assert delaunay_intensity_constant(d) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("d, expected", [(1, 1.0), (2, 0.5), (3, 35 / 128)])
def test_delaunay_extremal_index(d, expected):
    assert abs(delaunay_extremal_index(d) - expected) < 1e-12


@pytest.mark.parametrize("d", range(1, 8))
def test_extremal_index_matches_alpha_beta_product(d):
    product = delaunay_alpha(d) * delaunay_intensity_constant(d) * math.factorial(d - 1)
    assert product == pytest.approx(delaunay_extremal_index(d), rel=1e-12)


def test_beta_large_d_does_not_overflow():
    assert 0 < delaunay_intensity_constant(60) < 1


@pytest.mark.parametrize(
    "kind, log_rho, paper",
    [
        (K.INRADIUS_LARGE, 100, 2.82),
        (K.INRADIUS_SMALL, 100, 5.44e-23),
        (K.INRADIUS_SMALL, 4, 0.0381),
        (K.CIRCUMRADIUS_VORONOI, 100, 5.81),
        (K.CIRCUMRADIUS_DELAUNAY, 100, 8.16),
    ],
)
def test_threshold_table(kind, log_rho, paper):
    v = threshold(kind, 2, log_rho, 1.0)
    unit = 10 ** (math.floor(math.log10(paper)) - 2)
    assert abs(v - paper) < unit


def test_large_inradius_tail_identity():
    for log_rho in (5.0, 20.0, 100.0):
        for tau in (0.1, 1.0, 7.0):
            v = threshold(K.INRADIUS_LARGE, 2, log_rho, tau)
            # rho * exp(-4 pi v^2) == tau
            assert math.exp(log_rho - 4 * math.pi * v * v) == pytest.approx(tau, rel=1e-12)


def test_small_inradius_tail_identity():
    v = threshold(K.INRADIUS_SMALL, 2, 30.0, 2.0)
    assert math.exp(30.0) * -math.expm1(-4 * math.pi * v * v) == pytest.approx(2.0, rel=1e-10)


@given(st.lists(st.floats(3.0, 600.0), min_size=2, max_size=10, unique=True))
def test_threshold_monotone_in_rho(log_rhos):
    # Non-strict: neighbouring floats may round to the same threshold.
    log_rhos = sorted(log_rhos)
    for kind in (K.INRADIUS_LARGE, K.CIRCUMRADIUS_VORONOI, K.CIRCUMRADIUS_DELAUNAY):
        v = [threshold(kind, 2, lr) for lr in log_rhos]
        assert np.all(np.diff(v) >= 0)
    v = [threshold(K.INRADIUS_SMALL, 2, lr) for lr in log_rhos]
    assert np.all(np.diff(v) <= 0)


@pytest.mark.parametrize("kind", list(K))
def test_threshold_strictly_monotone_on_grid(kind):
    v = np.array([threshold(kind, 2, lr) for lr in np.linspace(3.0, 600.0, 50)])
    sign = -1 if kind is K.INRADIUS_SMALL else 1
    assert np.all(sign * np.diff(v) > 0)


def test_threshold_general_d():
    # Delaunay and inradius formulas are closed-form in any dimension.
    assert threshold(K.CIRCUMRADIUS_DELAUNAY, 3, 50.0) > 0
    assert threshold(K.INRADIUS_LARGE, 3, 50.0) > 0


def test_circumradius_tail_constant():
    v4 = threshold(K.CIRCUMRADIUS_VORONOI, 2, 100.0, a=4.0)
    v2 = threshold(K.CIRCUMRADIUS_VORONOI, 2, 100.0, a=2.0)
    assert v2 < v4
    assert math.pi * v4**2 - math.pi * v2**2 == pytest.approx(math.log(2.0))
    with pytest.raises(DomainError):
        threshold(K.CIRCUMRADIUS_VORONOI, 2, 100.0, a=5.0)
    with pytest.raises(DomainError):
        threshold(K.CIRCUMRADIUS_VORONOI, 3, 100.0)


@pytest.mark.parametrize(
    "kind, log_rho",
    [(K.INRADIUS_LARGE, -1.0), (K.INRADIUS_LARGE, 0.0), (K.CIRCUMRADIUS_VORONOI, -2.0), (K.CIRCUMRADIUS_DELAUNAY, 0.5)],
)
def test_threshold_domain_errors(kind, log_rho):
    with pytest.raises(DomainError):
        threshold(kind, 2, log_rho)


def test_window_geometry_paper_protocol():
    g = window_geometry(100.0, 0.01)
    assert g.q_rho == pytest.approx(1134, rel=1e-3)
    # The formulas give 344.49; the reported square is about [-173, 173]^2.
    assert g.q_side == pytest.approx(346, rel=0.01)
    assert 172 <= g.q_half <= 173.5
    assert g.big_d == 4
    assert g.c_side == pytest.approx(2 * 4 * math.exp(50.0) / g.n_rho)
    assert g.q_side == pytest.approx(math.exp(50.0) / g.m_rho)


def test_window_geometry_counts_match_floor_formula():
    g = window_geometry(30.0, 0.05)
    n = math.floor(30.0 ** (-(1.05) / 2) * math.exp(15.0))
    m = math.floor(g.q_rho ** (-0.5) * 30.0 ** (-(1.05) / 2) * math.exp(15.0))
    assert (g.n_rho, g.m_rho) == (n, m)


def test_window_geometry_domain():
    with pytest.raises(DomainError):
        window_geometry(math.e - 0.1)
    with pytest.raises(DomainError):
        window_geometry(100.0, epsilon=0.0)


def test_custom_separating_scale():
    g = window_geometry(100.0, separating_scale=lambda lr: 100.0)
    assert g.q_rho == 100.0


def test_parse_kind():
    assert K.parse("circumradius_delaunay") is K.CIRCUMRADIUS_DELAUNAY
    assert K.parse(K.INRADIUS_SMALL) is K.INRADIUS_SMALL
    with pytest.raises(ValueError):
        K.parse("volume")
