import math
import time

import pytest

from weierstrass_dim.core import DomainError, SystemParams, dimension_formula
from weierstrass_dim.critical import BracketError, h_b, solve_lambda_b


def test_h3_example():
    assert h_b(3, 0.75) == pytest.approx(1 / 1.5625 + 1 / 33.0625 - 0.75, abs=1e-12)
    assert h_b(3, 0.75) == pytest.approx(-0.07975, abs=1e-5)


def test_published_values_are_near_zeros():
    assert abs(h_b(3, 0.7269)) <= 1e-3
    assert abs(h_b(2, 0.9531)) <= 1e-3


@pytest.mark.parametrize("lam", [0.3, 1.0, 1 / 3 + 1e-10])
def test_h_domain(lam):
    with pytest.raises(DomainError):
        h_b(3, lam)


def test_h2_pole_guard():
    with pytest.raises(DomainError):
        h_b(2, 0.5 + 1e-12)


@pytest.mark.parametrize("b, expected", [(2, 0.9531), (3, 0.7269), (4, 0.6083)])
def test_lambda_b_values(b, expected):
    t = time.perf_counter()
    res = solve_lambda_b(b)
    assert time.perf_counter() - t < 1.0
    assert abs(res.lambda_b - expected) <= 5e-4
    assert res.residual <= 1e-10
    lo, hi = res.bracket
    assert hi - lo <= 1e-14 + 1e-16 and 1 / b < res.lambda_b < 1


def test_lambda_b_asymptote():
    assert abs(solve_lambda_b(1000).lambda_b - (1 / math.pi + 1e-3)) <= 0.01


def test_sign_change_and_monotone():
    prev = 1.0
    for b in range(2, 17):
        res = solve_lambda_b(b, tol=1e-12)
        lam = res.lambda_b
        assert h_b(b, lam - 1e-11) * h_b(b, lam + 1e-11) < 0
        assert lam < prev
        assert 1 < dimension_formula(SystemParams(b, lam)) < 2
        prev = lam


def test_solver_preconditions():
    with pytest.raises(DomainError):
        solve_lambda_b(1)
    with pytest.raises(DomainError):
        solve_lambda_b(3, tol=1e-16)


def test_bracket_error_carries_table():
    err = BracketError("no sign change", [(0.5, 1.0), (0.6, 2.0)])
    assert "scan table" in str(err) and len(err.scan) == 2
    assert isinstance(err, DomainError)
