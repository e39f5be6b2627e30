import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from uavcov.quadrature import (
    GAUSS_WEIGHTS,
    KRONROD_WEIGHTS,
    NODES,
    BudgetExhausted,
    NonFiniteError,
    Tolerance,
    integrate,
    integrate_batch,
    integrate_semi_infinite,
    integrate_semi_infinite_batch,
)


def test_rule_weights():
    assert KRONROD_WEIGHTS.sum() == pytest.approx(2.0, abs=1e-14)
    assert GAUSS_WEIGHTS.sum() == pytest.approx(2.0, abs=1e-14)
    assert np.all(np.diff(NODES) > 0)
    # Kronrod 15 integrates degree-22 polynomials exactly
    assert KRONROD_WEIGHTS @ NODES ** 22 == pytest.approx(2.0 / 23.0, rel=1e-13)


@pytest.mark.parametrize("f,a,b,exact", [
    (lambda x: x, 0.0, 1.0, 0.5),
    (np.exp, 0.0, 2.0, math.exp(2.0) - 1.0),
    (lambda x: np.cos(50 * x), 0.0, 3.0, math.sin(150.0) / 50.0),
    (lambda x: np.abs(x - 0.3), 0.0, 1.0, 0.29),
])
def test_finite(f, a, b, exact):
    res = integrate(f, a, b, Tolerance(rel=1e-9, abs=1e-12))
    assert res.converged
    assert res.value == pytest.approx(exact, rel=1e-8)
    assert abs(res.value - exact) <= max(10 * res.err_estimate, 1e-12)


def test_endpoint_singularity():
    res = integrate(lambda x: 1.0 / np.sqrt(x), 0.0, 1.0, Tolerance(rel=1e-6))
    assert res.converged
    assert abs(res.value - 2.0) <= max(res.err_estimate, 2e-6)


def test_breakpoints_help_kinks():
    f = lambda x: np.where(x < 0.3, 0.0, 1.0)  # noqa: E731
    res = integrate(f, 0.0, 1.0, Tolerance(rel=1e-10), points=[0.3])
    assert res.value == pytest.approx(0.7, rel=1e-12)


@pytest.mark.parametrize("f,a,scale,exact", [
    (lambda x: np.exp(-x), 0.0, 1.0, 1.0),
    (lambda x: x ** -2.0, 1.0, 1.0, 1.0),
    (lambda x: x / 25.0 * np.exp(-x * x / 50.0), 0.0, 5.0, 1.0),
    (lambda x: 1.0 / (1.0 + x * x), 0.0, 1.0, math.pi / 2.0),
])
def test_semi_infinite(f, a, scale, exact):
    res = integrate_semi_infinite(f, a, Tolerance(rel=1e-9), scale=scale)
    assert res.value == pytest.approx(exact, rel=1e-8)


@given(st.floats(0.1, 20.0), st.floats(0.0, 5.0))
def test_semi_infinite_exponential_property(k, a):
    res = integrate_semi_infinite(lambda x: np.exp(-k * x), a, Tolerance(rel=1e-8), scale=1.0 / k)
    assert res.value == pytest.approx(math.exp(-k * a) / k, rel=1e-7)


def test_scalar_integrand():
    res = integrate(lambda x: math.sin(x), 0.0, math.pi, vectorized=False)
    assert res.value == pytest.approx(2.0, rel=1e-9)


def test_batch_matches_individual():
    k = np.arange(1, 6, dtype=float)
    out = integrate_semi_infinite_batch(lambda x, o: np.exp(-k[o] * x), np.zeros(5), Tolerance(rel=1e-9))
    assert np.allclose(out.value, 1.0 / k, rtol=1e-8)
    fin = integrate_batch(lambda x, o: x ** k[o], np.zeros(5), np.ones(5), Tolerance(rel=1e-10))
    assert np.allclose(fin.value, 1.0 / (k + 1.0), rtol=1e-9)
    assert fin[2].value == pytest.approx(0.25)


def test_non_finite_raises():
    with pytest.raises(NonFiniteError):
        integrate(lambda x: np.where(x > 0.5, np.nan, 1.0), 0.0, 1.0)


def test_budget_exhausted_is_reported():
    res = integrate(lambda x: np.sin(1.0 / x), 1e-6, 1.0, Tolerance(rel=1e-14, abs=0.0, max_evals=300))
    assert not res.converged
    with pytest.raises(BudgetExhausted):
        res.require("sin(1/x)")


def test_tolerance_helpers():
    t = Tolerance(rel=1e-6, abs=1e-10)
    assert t.halved().rel == 5e-7
    assert t.inner().rel == pytest.approx(1e-7)
    with pytest.raises(ValueError):
        Tolerance(rel=-1.0)
