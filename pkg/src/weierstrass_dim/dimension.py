"""Box counting, fibre-bounded neighbourhoods V_N and the telescoping identity.

V_N(xi, x) is the part of the b-adic column I_N(x) (width b**-N) lying
between the two strong stable fibres at vertical distance K b**-N from the
fibre through (x, W(x)).  Its mass under Lebesgue measure lifted to the graph
is b**-N times the fraction of v in I_N(x) with |Delta_xi(x, v)| <= K b**-N.
Pulling back N steps of the skew product turns this into the fraction of
x' in [0, 1) with |Delta_{xi_-N}(x_-N, x')| <= K gamma**N.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels, _mc
from .core import DomainError, Ridge, WeierstrassFunction, eval_W
from .dynamics import DigitWord, xi_digits
from .fibers import ThetaEvaluator, bernoulli_length, delta, resolve_digits, slope_bound

MAX_BOX_SCALE = 12
MAX_TELESCOPE_N = 10


class FitError(DomainError):
    pass


@dataclass(frozen=True)
class ScalingFit:
    """Least-squares line through log-log points; residuals are kept."""

    x: np.ndarray
    y: np.ndarray
    slope: float
    intercept: float
    residuals: np.ndarray
    labels: tuple = ()
    dropped: tuple = ()

    @property
    def max_residual(self) -> float:
        return float(np.max(np.abs(self.residuals)))

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.x.tolist(), self.y.tolist()))


def fit_loglog(x, y, labels=(), dropped=()) -> ScalingFit:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 3:
        raise FitError(f"need at least 3 points for a scaling fit, got {x.size}")
    if np.ptp(x) == 0.0:
        raise FitError("degenerate fit: all scales are equal")
    if np.ptp(y) == 0.0:
        raise FitError("degenerate fit: all quantities are equal")
    slope, intercept = np.polyfit(x, y, 1)
    if not np.isfinite(slope):
        raise FitError("fit slope is not finite")
    res = y - (slope * x + intercept)
    return ScalingFit(x, y, float(slope), float(intercept), res, tuple(labels), tuple(dropped))


def default_K(wf: WeierstrassFunction) -> float:
    """K = K1 + 1, the band half-height multiplier."""
    return slope_bound(wf) + 1.0


def sandwich_depth(wf: WeierstrassFunction) -> int:
    """n1 with b**n1 > 2 K1 + 1 (one extra level of safety)."""
    return math.ceil(math.log(2.0 * slope_bound(wf) + 1.0) / math.log(wf.b)) + 1


# ---------------------------------------------------------------- box counting

def box_dimension(wf: WeierstrassFunction, n_min: int, n_max: int, samples_per_column: int = 64,
                  seed: int = 0, holder_correction: bool = True,
                  workers: int | None = None) -> ScalingFit:
    """Box-counting slope of the graph from column oscillations.

    At scale b**-N each of the b**N columns gets ``samples_per_column``
    jittered stratified samples.  The sampled oscillation (plus, optionally,
    the Holder bound on what falls between samples) gives
    floor(osc / b**-N) + 1 boxes.  The fit is log(count) against log(b**N).
    """
    if not (2 <= n_min < n_max <= MAX_BOX_SCALE):
        raise DomainError(f"need 2 <= n_min < n_max <= {MAX_BOX_SCALE}, got {n_min}, {n_max}")
    if samples_per_column < 2:
        raise DomainError("samples_per_column must be >= 2")
    b = wf.b
    exponent = 2.0 - wf.dim_D
    scales, counts = [], []
    for n in range(n_min, n_max + 1):
        cols = b**n
        width = float(b) ** -n
        stream = _mc.stream_key("boxdim", b, repr(wf.lam), wf.ridge.value, n, samples_per_column)
        jitter = _mc.gather(lambda rng, size, start: rng.random(size),
                            cols * samples_per_column, seed, stream, workers)
        osc = _kernels.column_oscillation(b, wf.lam, wf.n_terms, wf.ridge.code,
                                          jitter.reshape(cols, samples_per_column))
        if holder_correction:
            osc = osc + wf.holder_constant * (width / samples_per_column) ** exponent
        counts.append(float(np.sum(np.floor(osc / width) + 1.0)))
        scales.append(n)
    x = np.array(scales) * math.log(b)
    return fit_loglog(x, np.log(counts), labels=tuple(zip(scales, counts)))


# ------------------------------------------------------------ V_N machinery

@dataclass(frozen=True)
class MeasureEstimate:
    value: float
    stderr: float
    hits: int
    samples: int


def _estimate(hits: int, n: int, scale: float = 1.0) -> MeasureEstimate:
    p = hits / n
    return MeasureEstimate(p * scale, _mc.binomial_stderr(p, n) * scale, hits, n)


def _digits_needed(wf: WeierstrassFunction) -> int:
    if wf.ridge is Ridge.COSINE:
        return ThetaEvaluator(wf).n_max
    return bernoulli_length(wf.gamma, wf.tail_tol)


def _check_delta_support(wf: WeierstrassFunction):
    if wf.ridge is Ridge.PIECEWISE_LINEAR and wf.b != 2:
        raise DomainError("the piecewise linear fibre distance needs b = 2")


def _anchor_digits(wf, xi) -> np.ndarray:
    """Single row of xi digits, long enough for Delta at full tail accuracy."""
    n = _digits_needed(wf)
    row = resolve_digits(xi, wf.b, n)
    if row.shape[0] != 1:
        raise DomainError("expected a single base point xi")
    return row[0, :n]


@dataclass(frozen=True)
class BoxNeighborhood:
    """I_N(x) = [j b**-N, (j+1) b**-N) and the band multiplier K."""

    wf: WeierstrassFunction
    xi: object
    x: float
    N: int
    K: float
    j: int = field(init=False)

    def __post_init__(self):
        if not 0.0 <= self.x < 1.0:
            raise DomainError(f"x must lie in [0, 1), got {self.x!r}")
        if self.N < 0:
            raise DomainError("N must be >= 0")
        if self.N == 0:
            j = 0
        else:
            digits = xi_digits(self.x, self.wf.b, self.N)[0]
            j = 0
            for d in digits:
                j = j * self.wf.b + int(d)
        object.__setattr__(self, "j", j)

    @property
    def width(self) -> float:
        return float(self.wf.b) ** -self.N

    @property
    def interval(self) -> tuple[float, float]:
        return self.j * self.width, (self.j + 1) * self.width

    def sample(self, u: np.ndarray) -> np.ndarray:
        return (self.j + u) * self.width


def v_n_measure(wf: WeierstrassFunction, xi, x: float, N: int, K: float | None = None,
                mc_samples: int = 100_000, seed: int = 0,
                workers: int | None = None) -> MeasureEstimate:
    """Monte Carlo estimate of mu(V_N(xi, x)) = b**-N * m{v in I_N(x): |Delta_xi(x, v)| <= K b**-N}."""
    if N > MAX_BOX_SCALE:
        raise DomainError(f"N must be <= {MAX_BOX_SCALE}")
    _check_delta_support(wf)
    K = default_K(wf) if K is None else float(K)
    if K < 0:
        raise DomainError("K must be >= 0")
    nb = BoxNeighborhood(wf, xi, x, N, K)
    row = _anchor_digits(wf, xi)
    thr = K * nb.width

    def block(rng, size, start):
        v = nb.sample(rng.random(size))
        return np.abs(delta(wf, row, x, v)) <= thr

    stream = _mc.stream_key("v_n", wf.b, repr(wf.lam), wf.ridge.value, repr(x), N, repr(K))
    hits = _mc.count_hits(block, mc_samples, seed, stream, workers)
    return _estimate(hits, mc_samples, nb.width)


def rectangle_measure(wf: WeierstrassFunction, x: float, N: int, half_height: float,
                      mc_samples: int = 100_000, seed: int = 0,
                      workers: int | None = None) -> MeasureEstimate:
    """mu of I_N(x) x [W(x) - h, W(x) + h]."""
    nb = BoxNeighborhood(wf, 0.0, x, N, 0.0)
    wx = eval_W(wf, x)

    def block(rng, size, start):
        return np.abs(eval_W(wf, nb.sample(rng.random(size))) - wx) <= half_height

    stream = _mc.stream_key("rect", wf.b, repr(wf.lam), wf.ridge.value, repr(x), N, repr(half_height))
    hits = _mc.count_hits(block, mc_samples, seed, stream, workers)
    return _estimate(hits, mc_samples, nb.width)


def backward_anchor(wf: WeierstrassFunction, digits: np.ndarray, x: float, N: int):
    """(xi_-N, x_-N) as (digit row, float): each step moves floor(b x) to the front of xi."""
    row = list(int(d) for d in digits)
    for _ in range(N):
        p = wf.b * x
        k = min(math.floor(p), wf.b - 1)
        x = p - k
        row.insert(0, k)
    return np.asarray(row, dtype=np.int8), x


def strip_fraction(wf: WeierstrassFunction, digits: np.ndarray, x: float, threshold: float,
                   mc_samples: int, seed: int, stream, workers=None) -> MeasureEstimate:
    """m{x' in [0, 1): |Delta_xi(x, x')| <= threshold} for a digit row xi."""
    row = np.ascontiguousarray(digits, dtype=np.int8)

    def block(rng, size, start):
        return np.abs(delta(wf, row, x, rng.random(size))) <= threshold

    hits = _mc.count_hits(block, mc_samples, seed, stream, workers)
    return _estimate(hits, mc_samples)


@dataclass(frozen=True)
class TelescopeResult:
    N: int
    lhs: MeasureEstimate
    rhs: MeasureEstimate
    z_score: float


def _z_score(a: MeasureEstimate, b: MeasureEstimate) -> float:
    se = math.hypot(a.stderr, b.stderr)
    if se == 0.0:
        return 0.0 if a.value == b.value else math.inf
    return (a.value - b.value) / se


def telescope_check(wf: WeierstrassFunction, xi, x: float, N: int, K: float | None = None,
                    mc_samples: int = 100_000, seed: int = 0,
                    workers: int | None = None) -> TelescopeResult:
    """Compare mu(V_N)/m(I_N) with the pulled-back strip fraction using independent samples."""
    if not 0 <= N <= MAX_TELESCOPE_N:
        raise DomainError(f"N must lie in [0, {MAX_TELESCOPE_N}]")
    _check_delta_support(wf)
    K = default_K(wf) if K is None else float(K)
    mu = v_n_measure(wf, xi, x, N, K, mc_samples, seed, workers)
    width = float(wf.b) ** -N
    lhs = MeasureEstimate(mu.value / width, mu.stderr / width, mu.hits, mu.samples)
    row, x_back = backward_anchor(wf, _anchor_digits(wf, xi), x, N)
    stream = _mc.stream_key("telescope-rhs", wf.b, repr(wf.lam), wf.ridge.value, repr(x), N, repr(K))
    rhs = strip_fraction(wf, row, x_back, K * wf.gamma**N, mc_samples, seed, stream, workers)
    return TelescopeResult(N, lhs, rhs, _z_score(lhs, rhs))


def random_base_points(wf: WeierstrassFunction, n_points: int, seed: int) -> list[tuple[DigitWord, float]]:
    """Lebesgue-random (xi, x): xi as iid uniform digits, x uniform in [0, 1)."""
    rng = _mc.block_rng(seed, _mc.stream_key("base-points", wf.b), 0)
    n = _digits_needed(wf)
    digits = rng.integers(0, wf.b, size=(n_points, n), dtype=np.int8)
    xs = rng.random(n_points)
    return [(DigitWord(tuple(d), wf.b), float(x)) for d, x in zip(digits, xs)]


@dataclass(frozen=True)
class ScalingExponentResult:
    fits: tuple
    table: tuple  # (point index, N, measure estimate)
    dropped: tuple  # (point index, N) with zero hits

    @property
    def slopes(self) -> np.ndarray:
        return np.array([f.slope for f in self.fits if f is not None])

    @property
    def median_slope(self) -> float:
        return float(np.median(self.slopes))


def measure_scaling_exponent(wf: WeierstrassFunction, sample_points, N_list: Sequence[int],
                             K: float | None = None, mc_samples: int = 100_000, seed: int = 0,
                             workers: int | None = None) -> ScalingExponentResult:
    """Per base point, fit log m{x': |Delta_{xi_-N}(x_-N, x')| <= K gamma**N} against N log gamma.

    ``sample_points`` is a sequence of (xi, x) or an int (that many random
    points drawn from ``seed``).  Zero-count scales are dropped from a fit and
    listed in ``dropped``; points left with fewer than 3 scales get ``None``.
    """
    N_list = list(N_list)
    if any(b <= a for a, b in zip(N_list, N_list[1:])) or max(N_list) > MAX_TELESCOPE_N:
        raise DomainError(f"N_list must be increasing with max <= {MAX_TELESCOPE_N}")
    _check_delta_support(wf)
    if isinstance(sample_points, (int, np.integer)):
        sample_points = random_base_points(wf, int(sample_points), seed)
    K = default_K(wf) if K is None else float(K)
    log_g = math.log(wf.gamma)
    fits, table, dropped = [], [], []
    for i, (xi, x) in enumerate(sample_points):
        base = _anchor_digits(wf, xi)
        xs, ys, kept = [], [], []
        for N in N_list:
            row, x_back = backward_anchor(wf, base, x, N)
            stream = _mc.stream_key("scaling", wf.b, repr(wf.lam), wf.ridge.value, i, N, repr(K))
            est = strip_fraction(wf, row, x_back, K * wf.gamma**N, mc_samples, seed, stream, workers)
            table.append((i, N, est))
            if est.hits == 0:
                dropped.append((i, N))
                continue
            xs.append(N * log_g)
            ys.append(math.log(est.value))
            kept.append(N)
        fits.append(fit_loglog(xs, ys, labels=tuple(kept)) if len(xs) >= 3 else None)
    return ScalingExponentResult(tuple(fits), tuple(table), tuple(dropped))


def local_dimension_ratio(mu: MeasureEstimate, b: int, N: int) -> float:
    """log mu(V_N) / log b**-N (nan for an empty estimate)."""
    if mu.value <= 0.0:
        return float("nan")
    return math.log(mu.value) / (-N * math.log(b))
