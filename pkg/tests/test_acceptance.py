"""Acceptance criteria, each at its stated tolerance.

Every test records one [PASS]/[FAIL] line; the lines are repeated in the
pytest terminal summary.  Run alone with ``pytest tests/test_acceptance.py -v``
or as a script with ``python tests/test_acceptance.py``.
"""

import io
import math
import time

import numpy as np
import pytest
from scipy import stats

from weierstrass_dim.cli import run
from weierstrass_dim.core import SystemParams, WeierstrassFunction, functional_equation_residual
from weierstrass_dim.critical import solve_lambda_b
from weierstrass_dim.dimension import (box_dimension, local_dimension_ratio,
                                       measure_scaling_exponent, random_base_points,
                                       telescope_check, v_n_measure)
from weierstrass_dim.fibers import ThetaEvaluator, delta, delta_oracle, theta_z
from weierstrass_dim.measures import (approx_constant, bernoulli_density, bernoulli_samples,
                                      concentration_scan, rescaled_increment, shifted_state,
                                      theta_truncated, truncation_schedule)

pytestmark = pytest.mark.slow

PUBLISHED_LAMBDA = {2: 0.9531, 3: 0.7269, 4: 0.6083}


def test_ac01_lambda_b(criterion):
    t0 = time.perf_counter()
    results = {b: solve_lambda_b(b) for b in PUBLISHED_LAMBDA}
    elapsed = time.perf_counter() - t0
    ok = elapsed < 1.0
    parts = []
    for b, res in results.items():
        ok &= abs(res.lambda_b - PUBLISHED_LAMBDA[b]) <= 5e-4 and res.residual <= 1e-10
        parts.append(f"b={b} {res.lambda_b:.6f} (res {res.residual:.1e})")
    criterion("AC1 lambda_b reproduction", ok, ", ".join(parts) + f"; {elapsed:.3f}s")


def test_ac02_asymptote(criterion):
    lam = solve_lambda_b(1000).lambda_b
    target = 1 / math.pi + 1e-3
    criterion("AC2 large-b asymptote", abs(lam - target) <= 0.01,
              f"lambda_1000 = {lam:.6f}, 1/pi + 1e-3 = {target:.6f}")


def test_ac03_box_dimension(criterion):
    t0 = time.perf_counter()
    wf = WeierstrassFunction.create(3, 0.8)
    fit = box_dimension(wf, 3, 9, seed=42)
    elapsed = time.perf_counter() - t0
    wf2 = WeierstrassFunction.create(2, 0.55)
    fit2 = box_dimension(wf2, 3, 12, seed=42)
    ok = (abs(fit.slope - 1.79688) <= 0.05 and fit.max_residual <= 0.1 and elapsed < 60
          and abs(fit2.slope - 1.1375) <= 0.07)
    criterion("AC3 box dimension", ok,
              f"(3,0.8) slope {fit.slope:.4f} max resid {fit.max_residual:.3g} in {elapsed:.1f}s; "
              f"(2,0.55) slope {fit2.slope:.4f} max resid {fit2.max_residual:.3g}")


def test_ac04_functional_equation(criterion):
    rng = np.random.default_rng(4)
    x = rng.random(1000)
    worst = {}
    for b, lam, ridge in [(3, 0.8, "cos"), (2, 0.95, "cos"), (2, 0.7, "pwl"), (3, 0.8, "pwl")]:
        wf = WeierstrassFunction.create(b, lam, ridge, tail_tol=1e-12)
        worst[(b, lam, ridge)] = float(np.max(functional_equation_residual(wf, x)))
    ok = all(v <= 3e-12 for v in worst.values())
    criterion("AC4 functional equation", ok,
              ", ".join(f"{k}: {v:.2e}" for k, v in worst.items()))


def test_ac05_delta_oracle(criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(5)
    worst = {}
    for b, lam, ridge in [(2, 0.95, "cos"), (3, 0.8, "cos"), (2, 0.7, "pwl")]:
        wf = WeierstrassFunction.create(b, lam, ridge)
        xi, x, xp = rng.random(1000), rng.random(1000), rng.random(1000)
        worst[(b, lam, ridge)] = float(np.max(np.abs(delta(wf, xi, x, xp) - delta_oracle(wf, xi, x, xp))))
    elapsed = time.perf_counter() - t0
    ok = all(v <= 1e-6 for v in worst.values()) and elapsed < 30
    criterion("AC5 delta vs quadrature oracle", ok,
              ", ".join(f"{k}: {v:.2e}" for k, v in worst.items()) + f"; {elapsed:.1f}s")


def test_ac06_telescoping(criterion):
    t0 = time.perf_counter()
    worst = {}
    for b, lam, ridge in [(3, 0.8, "cos"), (2, 0.7, "pwl")]:
        wf = WeierstrassFunction.create(b, lam, ridge)
        zs = []
        for i, (word, x) in enumerate(random_base_points(wf, 20, seed=6)):
            for N in (2, 4, 6):
                zs.append(telescope_check(wf, word, x, N, mc_samples=100_000, seed=i).z_score)
        worst[ridge] = max(abs(z) for z in zs)
    elapsed = time.perf_counter() - t0
    ok = all(v <= 4 for v in worst.values()) and elapsed < 120
    criterion("AC6 telescoping identity", ok,
              f"max |z| cos {worst['cos']:.2f}, pwl {worst['pwl']:.2f} over 60 checks each; {elapsed:.1f}s")


def test_ac07_scaling_exponent(criterion):
    wf = WeierstrassFunction.create(3, 0.8)
    res = measure_scaling_exponent(wf, 20, [2, 4, 6, 8], mc_samples=100_000, seed=7)
    criterion("AC7 measure-scaling exponent", res.median_slope >= 0.85,
              f"median over {len(res.slopes)} points {res.median_slope:.4f} "
              f"(range {res.slopes.min():.3f}..{res.slopes.max():.3f}), dropped {len(res.dropped)}")


def test_ac08_local_dimension(criterion):
    wf = WeierstrassFunction.create(3, 0.8)
    ratios = [local_dimension_ratio(v_n_measure(wf, word, x, 8, mc_samples=100_000, seed=8), 3, 8)
              for word, x in random_base_points(wf, 20, seed=8)]
    med = float(np.nanmedian(ratios))
    criterion("AC8 local dimension", abs(med - 1.797) <= 0.12,
              f"median log mu(V_8)/log 3^-8 = {med:.4f} vs D = {wf.dim_D:.4f}")


def test_ac09_bernoulli_half(criterion):
    s = bernoulli_samples(0.5, 1_000_000, seed=9)
    ks = stats.kstest(s, stats.uniform(loc=-1, scale=2).cdf).statistic
    l2 = bernoulli_density(0.5, 1_000_000, seed=9).l2_norm_sq
    criterion("AC9 Bernoulli gamma=1/2 exactness", ks <= 0.01 and abs(l2 - 0.5) <= 0.02,
              f"KS {ks:.5f}, L2 norm sq {l2:.5f}")


def test_ac10_concentration(criterion):
    res = concentration_scan(0.5, [0.2, 0.5, 1.0], [0.01, 0.03, 0.09], mc_samples=100_000, seed=10)
    devs = [(row.p_hat - min(1.0, row.r / abs(row.z))) / row.stderr for row in res.rows]
    wf = WeierstrassFunction.create(3, 0.8)
    cos = concentration_scan(wf, [0.2], [1e-2, 3e-3, 1e-3], mc_samples=100_000, seed=10)
    slope = cos.r_fits[0.2].slope
    ok = max(abs(d) for d in devs) <= 3 and slope >= 0.8
    criterion("AC10 concentration scan", ok,
              f"pwl max |dev| {max(abs(d) for d in devs):.2f} SE on 3x3 grid; cos r-exponent {slope:.4f}")


def test_ac11_truncation_machinery(criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(11)
    failures = 0
    ratio_max = 0.0
    explicit_min = math.inf
    for _ in range(1000):
        b = int(rng.integers(2, 7))
        lam = float(rng.uniform(1 / b + 0.02, 0.97))
        wf = WeierstrassFunction.create(b, lam)
        ev = ThetaEvaluator(wf)
        ell = int(rng.integers(1, 5))
        r = 10.0 ** rng.uniform(-8, -1.5)
        z = float(rng.choice([-1, 1]) * rng.uniform(2.5 * r, 1.0))
        s = truncation_schedule(wf.params, ell, r, z)
        s.check()
        digits = rng.integers(0, b, (1, ev.n_max + s.n_levels[-1] + 1), dtype=np.int8)
        x = float(rng.random())
        C, g = ev.sup_bound, ev.gamma
        tail = abs(theta_z(ev, digits, x, z)[0] - theta_truncated(ev, digits, x, z, s.n_levels[-1])[0])
        failures += tail > C * g ** s.n_levels[-1] + 1e-12
        Cp = approx_constant(ev)
        explicit_min = min(explicit_min, Cp)
        for k in range(1, ell + 1):
            n_prev = s.n_levels[k - 1]
            sd, sx = shifted_state(b, digits, np.array([x]), n_prev)
            shifted = theta_z(ev, sd, sx, 0.0)[0]
            inc = rescaled_increment(ev, digits, x, 0.0, s, k)[0]
            failures += abs(inc - shifted) > C * g ** s.d[k - 1] + 1e-12
            step = (theta_truncated(ev, digits, x, z, s.n_levels[k])[0]
                    - theta_truncated(ev, digits, x, z, n_prev)[0])
            gap = abs(step - g**n_prev * shifted)
            failures += gap > Cp * g ** s.n_levels[k] + 1e-12
            ratio_max = max(ratio_max, (gap - 1e-12) / (Cp * g ** s.n_levels[k]))
    elapsed = time.perf_counter() - t0
    ok = failures == 0 and elapsed < 30
    criterion("AC11 truncation machinery", ok,
              f"{failures} violations over 1000 tuples; sweep max of gap / (C' gamma^n_k) = {ratio_max:.3f} "
              f"(explicit C' >= {explicit_min:.3f}); {elapsed:.1f}s")


def _cli(argv):
    out = io.StringIO()
    code = run(argv, stdout=out, stderr=io.StringIO())
    return code, out.getvalue().encode()


def test_ac12_determinism(criterion):
    runs = [
        ["telescope", "--N", "2", "4", "--mc-samples", "100000", "--seed", "12"],
        ["concentration", "--mc-samples", "100000", "--seed", "12"],
        ["theta-stats", "--samples", "100000", "--seed", "12"],
        ["scaling", "--points", "2", "--N", "2", "3", "4", "--mc-samples", "50000", "--seed", "12"],
        ["boxdim", "--nmin", "3", "--nmax", "7", "--seed", "12"],
        ["bernoulli", "--gamma", "0.7", "--samples", "200000", "--seed", "12", "--format", "json"],
    ]
    same = 0
    for argv in runs:
        outs = {_cli(argv + ["--threads", str(t)]) for t in (1, 2, 4)}
        same += len(outs) == 1 and next(iter(outs))[0] == 0
    criterion("AC12 determinism across worker counts", same == len(runs),
              f"{same}/{len(runs)} subcommands byte-identical for 1, 2, 4 workers")


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
