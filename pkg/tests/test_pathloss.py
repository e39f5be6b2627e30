import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from uavcov import pathloss as pl
from uavcov.model import SystemParams

P = SystemParams()
LOS, NLOS = pl.LOS, pl.NLOS


def test_los_probability_values():
    assert pl.p_los(0.0, P) == pytest.approx(1.0 / (1.0 + 11.95 * math.exp(-0.136 * (90 - 11.95))))
    assert pl.p_los(10.0, P) == pytest.approx(0.88227, abs=1e-5)
    # grazing-angle floor 1/(1 + b exp(b c))
    assert pl.p_los(1e7, P) == pytest.approx(0.016207653459802424, rel=1e-4)
    r = np.linspace(0, 500, 101)
    assert np.all(np.diff(pl.p_los(r, P)) <= 0)
    assert np.allclose(pl.p_los(r, P) + pl.p_nlos(r, P), 1.0)


def test_los_probability_grows_with_height():
    assert pl.p_los(50.0, replace(P, height=30.0)) > pl.p_los(50.0, P)


def test_pathloss_values():
    assert pl.pathloss_uav(0.0, LOS, P) == pytest.approx(1000.0)
    assert pl.pathloss_uav(0.0, NLOS, P) == pytest.approx(10 * 10 ** 3.5)
    assert pl.pathloss_bs(100.0, P) == pytest.approx(100.0 ** 3.5)
    assert pl.support_min(LOS, P) == pytest.approx(1000.0)


@given(st.floats(0.0, 1e4), st.sampled_from([LOS, NLOS]))
def test_horizontal_distance_inverts_pathloss(r, s):
    x = pl.pathloss_uav(r, s, P)
    assert pl.horizontal_distance(x, s, P) == pytest.approx(r, rel=1e-7, abs=1e-5)


def test_horizontal_distance_clamps_below_support():
    assert pl.horizontal_distance(1.0, LOS, P) == 0.0
    assert pl.bs_distance(pl.pathloss_bs(123.0, P), P) == pytest.approx(123.0)


@pytest.mark.parametrize("R", [0.0, 3.0, 55.0, 700.0, 2.5e4, 5e7])
@pytest.mark.parametrize("s", [LOS, NLOS])
def test_disc_integral_matches_quad(R, s):
    pts = [0.0] + [v for v in (30.0, 1e2, 1e3, 1e4, 1e5, 1e6, 1e7) if v < R] + [R]
    ref = sum(integrate.quad(lambda r: pl.p_state(r, s, P) * r, a, b, limit=500, epsrel=1e-13)[0]
              for a, b in zip(pts[:-1], pts[1:]))
    assert pl.disc_integral(R, s, P) == pytest.approx(ref, rel=1e-9, abs=1e-12)


@pytest.mark.parametrize("R", [0.0, 2.0, 9.0, 30.0, 300.0])
def test_center_tail_matches_quad(R):
    for s in (LOS, NLOS):
        g = lambda d: pl.p_state(d, s, P) * pl.cluster_pdf(d, P.sigma_c)  # noqa: E731
        ref = integrate.quad(g, R, np.inf, epsabs=1e-15)[0]
        assert pl.center_state_tail(R, s, P) == pytest.approx(ref, rel=1e-9, abs=1e-14)


def test_cluster_distance_distribution():
    d = np.linspace(0, 60, 7)
    assert np.allclose(pl.cluster_ccdf(d, 5.0), np.exp(-d * d / 50.0))
    assert integrate.quad(lambda x: pl.cluster_pdf(x, 5.0), 0, np.inf)[0] == pytest.approx(1.0)


def test_exact_center_ccdf_frozen():
    # independent nested quadrature (tests/oracles.py)
    assert pl.ccdf_l0_exact(2000.0, P) == pytest.approx(0.3177432551481165, rel=1e-8)
    assert pl.ccdf_l0_exact(1.0, P) == pytest.approx(1.0, abs=1e-12)


def test_closed_form_center_ccdf_is_not_a_distribution():
    # weighting by the LOS probability at the boundary distance loses mass
    assert pl.ccdf_l0(1.0, P) == pytest.approx(1.0)
    assert pl.ccdf_l0(2000.0, P) < pl.ccdf_l0_exact(2000.0, P) - 0.02
    assert pl.ccdf_l0(1e4, P) < 0.01 < pl.ccdf_l0_exact(1e4, P)


@pytest.mark.parametrize("sigma,height", [(5.0, 10.0), (20.0, 30.0), (1.0, 100.0)])
@pytest.mark.parametrize("s", [LOS, NLOS])
def test_pdf_l0_integrates_to_one(sigma, height, s):
    p = replace(P, sigma_c=sigma, height=height)
    lo = pl.support_min(s, p)
    f = lambda x: pl.pdf_l0(x, s, p)  # noqa: E731
    # integrate in distance to avoid the long path-loss tail
    g = lambda d: f(pl.pathloss_uav(d, s, p)) * (  # noqa: E731
        p.eta(s) * p.alpha(s) * d * (d * d + p.height ** 2) ** (p.alpha(s) / 2 - 1))
    total = integrate.quad(g, 0, np.inf, epsabs=1e-14, epsrel=1e-12, limit=200)[0]
    assert total == pytest.approx(1.0, abs=1e-6)
    assert f(0.5 * lo) == 0.0


def test_intensity_frozen_and_tail():
    assert pl.intensity_l1_total(1e6, P) == pytest.approx(0.3689071823083674, rel=1e-8)
    assert pl.intensity_l2(1e6, P) == pytest.approx(math.pi * 1e-5 * 1e6 ** (2 / 3.5))
    assert pl.ccdf_l2(1e6, P) == pytest.approx(math.exp(-pl.intensity_l2(1e6, P)))


@pytest.mark.parametrize("x", [2e3, 5e4, 1e7, 3e9])
def test_intensity_densities_are_derivatives(x):
    h = 1e-5 * x
    for s in (LOS, NLOS):
        num = (pl.intensity_l1(x + h, s, P) - pl.intensity_l1(x - h, s, P)) / (2 * h)
        assert pl.intensity_density_l1(x, s, P) == pytest.approx(num, rel=1e-5)
    num = (pl.intensity_l2(x + h, P) - pl.intensity_l2(x - h, P)) / (2 * h)
    assert pl.intensity_density_l2(x, P) == pytest.approx(num, rel=1e-6)


def test_void_probabilities_monotone():
    x = np.logspace(2, 12, 60)
    for f in (lambda v: pl.ccdf_l1(v, P), lambda v: pl.ccdf_l2(v, P), lambda v: pl.ccdf_l0_exact(v, P)):
        y = f(x)
        assert np.all(np.diff(y) <= 1e-15)
        assert np.all((y >= 0) & (y <= 1 + 1e-12))


def test_scalar_in_scalar_out():
    assert isinstance(pl.p_los(3.0, P), float)
    assert isinstance(pl.ccdf_l1(3e4, P), float)
    assert pl.ccdf_l1(np.array([3e4]), P).shape == (1,)
