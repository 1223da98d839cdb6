"""Laws of Theta_0, Theta_z and the Bernoulli convolution, and the multi-scale truncation.

Random xi are represented by iid uniform digits, which is exactly the image
of Lebesgue measure; digit words are cut at the evaluator's n_max so the
truncation error stays inside the series tail budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _mc
from .core import DomainError, Ridge, SystemParams, WeierstrassFunction
from .dimension import FitError, ScalingFit, fit_loglog
from .fibers import ThetaEvaluator, bernoulli_length, theta_partial

DEFAULT_BINS = 512


@dataclass(frozen=True)
class EmpiricalDensity:
    """Fixed-bin histogram density on [lo, hi]."""

    bin_edges: np.ndarray
    counts: np.ndarray
    total_samples: int

    def __post_init__(self):
        if self.counts.size != self.bin_edges.size - 1:
            raise DomainError("counts must have one entry per bin")
        if self.total_samples <= 0 or self.counts.sum() > self.total_samples:
            raise DomainError("inconsistent sample total")
        width = float(self.bin_edges[-1] - self.bin_edges[0])
        if self.l2_norm_sq < self.mass**2 / width * (1.0 - 1e-12):
            raise DomainError("L2 norm below the Cauchy-Schwarz floor")

    @classmethod
    def from_samples(cls, samples, lo: float, hi: float, bins: int = DEFAULT_BINS) -> "EmpiricalDensity":
        samples = np.asarray(samples, dtype=float)
        edges = np.linspace(lo, hi, bins + 1)
        counts, _ = np.histogram(samples, bins=edges)
        return cls(edges, counts, samples.size)

    @property
    def bin_width(self) -> float:
        return float(self.bin_edges[1] - self.bin_edges[0])

    @property
    def density(self) -> np.ndarray:
        return self.counts / (self.total_samples * self.bin_width)

    @property
    def mass(self) -> float:
        return float(self.counts.sum() / self.total_samples)

    @property
    def l2_norm_sq(self) -> float:
        return float(np.sum(self.density**2) * self.bin_width)

    def rows(self):
        """(bin_left, bin_right, density) triples."""
        return zip(self.bin_edges[:-1], self.bin_edges[1:], self.density)


def _random_digits(rng, size, b, n):
    return rng.integers(0, b, size=(size, n), dtype=np.int8)


def sample_theta0_conditional(wf: WeierstrassFunction, x: float, n_samples: int, seed: int = 0,
                              workers: int | None = None) -> np.ndarray:
    """Draws from nu_x, the law of Theta_0(., x) under uniform xi."""
    if wf.ridge is not Ridge.COSINE:
        raise DomainError("Theta_0 is defined for the cosine ridge")
    ev = ThetaEvaluator(wf)
    xs = np.array([float(x)])

    def block(rng, size, start):
        digits = _random_digits(rng, size, wf.b, ev.n_max)
        return theta_partial(ev, digits, np.full(size, xs[0]), 0.0, 1, ev.n_max)

    stream = _mc.stream_key("theta0", wf.b, repr(wf.lam), repr(float(x)))
    return _mc.gather(block, n_samples, seed, stream, workers)


def theta0_density(wf: WeierstrassFunction, x: float, n_samples: int, bins: int = DEFAULT_BINS,
                   seed: int = 0, workers: int | None = None) -> EmpiricalDensity:
    bound = ThetaEvaluator(wf).sup_bound
    return EmpiricalDensity.from_samples(sample_theta0_conditional(wf, x, n_samples, seed, workers),
                                         -bound, bound, bins)


def capacity_H(wf: WeierstrassFunction, x_grid_size: int = 32, samples_per_x: int = 20_000,
               bins: int = DEFAULT_BINS, seed: int = 0, workers: int | None = None) -> float:
    """Mean over a midpoint x-grid of the histogram L2 norm squared of nu_x."""
    xs = (np.arange(x_grid_size) + 0.5) / x_grid_size
    return float(np.mean([theta0_density(wf, x, samples_per_x, bins, seed, workers).l2_norm_sq
                          for x in xs]))


def bernoulli_samples(gamma: float, n_samples: int, seed: int = 0, tol: float = 1e-12,
                      workers: int | None = None) -> np.ndarray:
    """Draws of sum_n gamma**n Z_n with iid fair signs Z_n."""
    if not 0.0 < gamma < 1.0:
        raise DomainError(f"gamma must lie in (0, 1), got {gamma}")
    n = bernoulli_length(gamma, tol)
    weights = gamma ** np.arange(1, n + 1)

    def block(rng, size, start):
        signs = 1.0 - 2.0 * rng.integers(0, 2, size=(size, n), dtype=np.int8)
        return signs @ weights

    return _mc.gather(block, n_samples, seed, _mc.stream_key("bernoulli", repr(gamma)), workers)


def bernoulli_density(gamma: float, n_samples: int, bins: int = DEFAULT_BINS, seed: int = 0,
                      workers: int | None = None) -> EmpiricalDensity:
    """Histogram of the Bernoulli convolution on its support [-gamma/(1-gamma), gamma/(1-gamma)]."""
    bound = gamma / (1.0 - gamma)
    return EmpiricalDensity.from_samples(bernoulli_samples(gamma, n_samples, seed, workers=workers),
                                         -bound, bound, bins)


# ------------------------------------------------------ multi-scale truncation

class TrivialRegime(DomainError):
    """|z| <= 2r: the concentration bound holds trivially, no schedule is built."""


@dataclass(frozen=True)
class TruncationSchedule:
    gamma: float
    b: int
    alpha: float
    ell: int
    r: float
    z: float
    r_z: float
    n_levels: tuple[int, ...]
    N_cap: int

    @property
    def d(self) -> tuple[int, ...]:
        """d_k = n_k - n_{k-1} for k = 1..ell."""
        return tuple(b - a for a, b in zip(self.n_levels, self.n_levels[1:]))

    def check(self, rtol: float = 1e-12) -> None:
        """Raise AssertionError if any schedule invariant fails."""
        n = self.n_levels
        assert 0.0 < self.alpha < 1.0, self.alpha
        assert all(a <= b for a, b in zip(n, n[1:])), n
        assert n[-1] <= self.N_cap, (n, self.N_cap)
        assert n[-1] == math.ceil(math.log(self.r_z) / math.log(self.gamma)), n
        for k in range(self.ell):
            assert n[k] == math.ceil(self.alpha * n[k + 1]), (k, n)
        for k in range(self.ell + 1):
            p = self.alpha ** (self.ell - k)
            # gamma**n_k <= r_z**(alpha**(ell-k)), compared in logs
            assert n[k] * math.log(self.gamma) <= p * math.log(self.r_z) + rtol * (1 + abs(math.log(self.r_z))), k
            assert n[k] <= p * n[-1] + (1.0 - p) / (1.0 - self.alpha) + rtol * (1 + n[-1]), k
        for k in range(1, self.ell + 1):
            # (gamma/b)**n_{k-1} <= gamma**n_k
            assert n[k - 1] * math.log(self.gamma / self.b) <= n[k] * math.log(self.gamma) + rtol * (1 + n[k]), k


def truncation_schedule(params: SystemParams, ell: int, r: float, z: float) -> TruncationSchedule:
    """Levels n_ell = ceil(log r_z / log gamma), n_k = ceil(alpha n_{k+1}), r_z = 2r/|z|."""
    if ell < 1:
        raise DomainError("ell must be >= 1")
    if not 0.0 < r < 1.0:
        raise DomainError(f"r must lie in (0, 1), got {r}")
    if not 0.0 < abs(z) <= 1.0:
        raise DomainError(f"z must satisfy 0 < |z| <= 1, got {z}")
    if abs(z) <= 2.0 * r:
        raise TrivialRegime(f"|z| = {abs(z)} <= 2r = {2 * r}: trivial regime, no schedule")
    g = params.gamma
    alpha = math.log(g) / math.log(g / params.b)
    r_z = 2.0 * r / abs(z)
    levels = [math.ceil(math.log(r_z) / math.log(g))]
    for _ in range(ell):
        levels.append(math.ceil(alpha * levels[-1]))
    levels.reverse()
    N_cap = math.ceil(math.log(2.0 * r) / math.log(g))
    sched = TruncationSchedule(g, params.b, alpha, ell, r, z, r_z, tuple(levels), N_cap)
    try:
        sched.check()
    except AssertionError as exc:  # pragma: no cover - would be a construction bug
        raise DomainError(f"schedule invariant violated: {exc}") from exc
    return sched


def theta_truncated(ev: ThetaEvaluator, xi, x, z, n_terms: int):
    """Theta_{z} summed over n = 1..n_terms."""
    return theta_partial(ev, xi, x, z, 1, n_terms)


def rescaled_increment(ev: ThetaEvaluator, xi, x, z, schedule: TruncationSchedule, k: int):
    """gamma**-n_{k-1} (Theta_{z,k} - Theta_{z,k-1})."""
    if not 1 <= k <= schedule.ell:
        raise DomainError(f"k must lie in [1, {schedule.ell}]")
    lo, hi = schedule.n_levels[k - 1], schedule.n_levels[k]
    upper = theta_truncated(ev, xi, x, z, hi)
    lower = theta_truncated(ev, xi, x, z, lo) if lo > 0 else 0.0
    return (upper - lower) / ev.gamma**lo


def shifted_state(b: int, digits: np.ndarray, x, n: int):
    """B^n applied to (digits, x): drop n digits from xi, contract them into x."""
    x = np.array(x, dtype=float, copy=True)
    for i in range(n):
        x = (x + digits[:, i]) / b
    return np.ascontiguousarray(digits[:, n:]), x


def approx_constant(ev: ThetaEvaluator) -> float:
    """Explicit C' with |Theta_{z,k} - Theta_{z,k-1} - gamma**n_{k-1} Theta_0 o B^n_{k-1}| <= C' gamma**n_k.

    Sum of the tail bound 2 pi gamma / (1 - gamma) and the z-sensitivity
    2 pi**2 (1 + pi/6) (gamma/b) / (1 - gamma/b) of the rescaled increment.
    """
    g, b = ev.gamma, ev.wf.b
    return ev.sup_bound + 2.0 * math.pi**2 * (1.0 + math.pi / 6.0) * (g / b) / (1.0 - g / b)


# ---------------------------------------------------------- concentration scan

@dataclass(frozen=True)
class ConcentrationRow:
    z: float
    r: float
    p_hat: float
    stderr: float
    center: float


@dataclass(frozen=True)
class ConcentrationResult:
    rows: tuple[ConcentrationRow, ...]
    r_fits: dict  # z -> ScalingFit of log p against log r
    z_fits: dict  # r -> ScalingFit of log p against log |z|
    dropped: tuple

    def cell(self, z: float, r: float) -> ConcentrationRow:
        for row in self.rows:
            if row.z == z and row.r == r:
                return row
        raise KeyError((z, r))


def _theta_sampler(model, z: float):
    """Block function drawing Theta_z at Lebesgue-random (xi, x) for the given model."""
    if isinstance(model, WeierstrassFunction) and model.ridge is Ridge.COSINE:
        ev = ThetaEvaluator(model)

        def block(rng, size, start):
            digits = _random_digits(rng, size, model.b, ev.n_max)
            return theta_partial(ev, digits, rng.random(size), z, 1, ev.n_max)

        return block
    if isinstance(model, WeierstrassFunction):
        if model.b != 2:
            raise DomainError("piecewise linear concentration scan needs b = 2")
        gamma = model.gamma
    else:
        gamma = float(model)
        if not 0.0 < gamma < 1.0:
            raise DomainError(f"gamma must lie in (0, 1), got {gamma}")
    n = bernoulli_length(gamma, 1e-12)
    weights = gamma ** np.arange(1, n + 1)

    def block(rng, size, start):
        signs = 1.0 - 2.0 * rng.integers(0, 2, size=(size, n), dtype=np.int8)
        return signs @ weights

    return block


def _model_key(model):
    if isinstance(model, WeierstrassFunction):
        return (model.b, repr(model.lam), model.ridge.value)
    return ("bernoulli", repr(float(model)))


def concentration_scan(model, z_list: Sequence[float], r_list: Sequence[float],
                       interval_centers: Sequence[float] = (0.0,), mc_samples: int = 100_000,
                       seed: int = 0, workers: int | None = None) -> ConcentrationResult:
    """max_c P(Theta_z in [c - r/|z|, c + r/|z|]) over random (xi, x), on a (z, r) grid.

    ``model`` is a cosine :class:`WeierstrassFunction` (Theta_z), a piecewise
    linear one with b = 2 (Theta(xi), independent of z), or a bare gamma for
    the Bernoulli convolution itself.  All r at one z share the same draws.
    """
    z_list = [float(z) for z in z_list]
    r_list = [float(r) for r in r_list]
    for z in z_list:
        for r in r_list:
            if not 2.0 * r < abs(z) <= 1.0:
                raise DomainError(f"need 2r < |z| <= 1, got z={z}, r={r}")
    centers = np.asarray(interval_centers, dtype=float)
    rows, dropped = [], []
    for z in z_list:
        stream = _mc.stream_key("concentration", *_model_key(model), repr(z))
        theta = _mc.gather(_theta_sampler(model, z), mc_samples, seed, stream, workers)
        for r in r_list:
            half = r / abs(z)
            hits = [int(np.count_nonzero(np.abs(theta - c) <= half)) for c in centers]
            best = int(np.argmax(hits))
            p = hits[best] / mc_samples
            rows.append(ConcentrationRow(z, r, p, _mc.binomial_stderr(p, mc_samples), float(centers[best])))
            if hits[best] == 0:
                dropped.append((z, r))

    def fit(pairs, labels):
        pairs = [(a, p) for a, p in pairs if p > 0]
        try:
            return fit_loglog([math.log(a) for a, _ in pairs], [math.log(p) for _, p in pairs], labels)
        except FitError:
            return None

    r_fits = {z: fit([(row.r, row.p_hat) for row in rows if row.z == z], r_list) for z in z_list}
    z_fits = {r: fit([(abs(row.z), row.p_hat) for row in rows if row.r == r], z_list) for r in r_list}
    return ConcentrationResult(tuple(rows), r_fits, z_fits, tuple(dropped))
