import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from weierstrass_dim.core import (DomainError, Ridge, SystemParams, WeierstrassFunction,
                                  dimension_formula, eval_W, eval_ridge,
                                  functional_equation_residual, series_length)


def test_params_validation():
    with pytest.raises(DomainError):
        SystemParams(1, 0.9)
    with pytest.raises(DomainError):
        SystemParams(3, 0.3)
    with pytest.raises(DomainError):
        SystemParams(2, 1.0)
    with pytest.raises(DomainError):
        SystemParams(2.0, 0.7)


@given(st.integers(2, 50), st.floats(1e-6, 1.0 - 1e-6))
def test_params_invariants(b, t):
    lam = 1.0 / b + t * (1.0 - 1.0 / b)
    if not 1.0 / b < lam < 1.0:
        return
    p = SystemParams(b, lam)
    assert 0.0 < p.gamma < 1.0
    assert abs(p.gamma * b * lam - 1.0) <= 2.3e-16
    assert 1.0 < p.dim_D < 2.0


@pytest.mark.parametrize("b, lam, expected, tol", [
    (4, 0.5, 1.5, 1e-15),
    (2, 0.9531, 1.93070, 1e-5),
    (3, 0.8, 1.79688, 1e-5),
])
def test_dimension_formula(b, lam, expected, tol):
    assert abs(dimension_formula(SystemParams(b, lam)) - expected) <= tol


def test_ridge_values():
    assert eval_ridge(Ridge.COSINE, 0.0) == 1.0
    assert eval_ridge(Ridge.PIECEWISE_LINEAR, 0.25) == 0.25
    # (-1)**floor(2u) taken verbatim: +1 at u = 0.25
    assert eval_ridge(Ridge.PIECEWISE_LINEAR, 0.25, 1) == 1.0
    assert eval_ridge(Ridge.PIECEWISE_LINEAR, 0.75, 1) == -1.0
    assert eval_ridge(Ridge.COSINE, 0.25, 1) == pytest.approx(-2 * math.pi, abs=1e-14)


@pytest.mark.parametrize("u", [0.0, 0.5, 1.0, 2.5])
def test_pwl_derivative_jump(u):
    with pytest.raises(DomainError, match="derivative undefined at jump"):
        eval_ridge(Ridge.PIECEWISE_LINEAR, u, 1)


def test_ridge_bounds_and_period():
    u = np.random.default_rng(0).random(10_000)
    for r in Ridge:
        g = eval_ridge(r, u)
        assert np.all(np.abs(g) <= r.sup_bound)
        np.testing.assert_allclose(eval_ridge(r, u + 1.0), g, atol=1e-12)
        d = eval_ridge(r, u, 1)
        assert np.all(np.abs(d) <= r.deriv_bound + 1e-12)


def test_series_length_bounds_tail():
    for lam in (0.55, 0.8, 0.95, 0.99):
        n = series_length(lam, 1e-12)
        assert lam**n / (1 - lam) <= 1e-12
        assert lam ** (n - 1) / (1 - lam) > 1e-12


def test_eval_W_examples():
    wf = WeierstrassFunction.create(2, 0.6)
    assert abs(eval_W(wf, 0.0) - 2.5) <= wf.tail_tol
    assert abs(eval_W(wf, 0.5) - 0.5) <= wf.tail_tol
    assert eval_W(WeierstrassFunction.create(2, 0.7, "pwl"), 0.0) == 0.0


def test_eval_W_shapes_and_determinism():
    wf = WeierstrassFunction.create(3, 0.8)
    x = np.random.default_rng(1).random((4, 5))
    a, b = eval_W(wf, x), eval_W(wf, x.copy())
    assert a.shape == (4, 5)
    assert np.array_equal(a, b)
    assert isinstance(wf(0.3), float)


@pytest.mark.parametrize("b, lam, ridge, x", [
    (2, 0.6, "cos", 0.0), (3, 0.8, "cos", 0.37), (2, 0.7, "pwl", 0.3),
])
def test_functional_equation_examples(b, lam, ridge, x):
    wf = WeierstrassFunction.create(b, lam, ridge)
    assert functional_equation_residual(wf, x) <= 3 * wf.tail_tol


def test_holder_bound():
    rng = np.random.default_rng(2)
    for b, lam in [(2, 0.7), (3, 0.8), (5, 0.5)]:
        wf = WeierstrassFunction.create(b, lam)
        x = rng.random(5000) * 0.998
        h = rng.random(5000) * 1e-3
        lhs = np.abs(eval_W(wf, x + h) - eval_W(wf, x))
        assert np.all(lhs <= wf.holder_constant * h ** (2 - wf.dim_D) + 2 * wf.tail_tol)


def test_holder_constant_matches_cosine_formula():
    wf = WeierstrassFunction.create(3, 0.8)
    assert wf.holder_constant == pytest.approx(2 * math.pi / (3 * 0.8 - 1) + 2 / 0.2)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.0, 1.0, exclude_max=True))
def test_functional_equation_property(x):
    wf = WeierstrassFunction.create(3, 0.8)
    assert functional_equation_residual(wf, x) <= 3e-12
