"""Strong stable fibres of the skew product and the distance between them.

For fixed xi the fibres are graphs over x whose slope is

    X3(xi, t) = -sum_{n>=1} gamma**n g'(x_n),   x_n = (t + k_n(xi)) / b**n.

The vertical distance of the fibres through (x, W(x)) and (x', W(x')) is
Delta_xi(x, x') = W(x') - W(x) - int_x^x' X3(xi, t) dt.  For the cosine ridge
the integral has the closed form (x' - x) * Theta_{x'-x}(xi, x); for the
piecewise linear ridge with b = 2 the slope is constant and equals -Theta(xi),
a Bernoulli convolution.

Points xi are given either as floats in [0, 1) (digits are read off with the
float expanding map), as a :class:`DigitWord`, or as an int8 digit array of
shape (m, n) / (n,) for Monte Carlo use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .core import DomainError, Ridge, WeierstrassFunction, eval_W
from .dynamics import DigitWord, xi_digits

DEFAULT_QUAD_TOL = 1e-10
QUAD_MAX_DEPTH = 40
QUAD_MAX_PANELS = 200_000


class QuadratureError(RuntimeError):
    def __init__(self, message, error_estimate):
        super().__init__(f"{message} (achieved error estimate {error_estimate:.3e})")
        self.error_estimate = error_estimate


def s_kernel(t):
    """s(t) = 2 sin(pi t) / t, continuous at 0 with s(0) = 2 pi."""
    t = np.asarray(t, dtype=float)
    pt2 = (np.pi * t) ** 2
    small = np.abs(t) < _kernels.S_TAYLOR_CUTOFF
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = 2.0 * np.sin(np.pi * t) / t
    out = np.where(small, 2.0 * np.pi * (1.0 - pt2 / 6.0 + pt2 * pt2 / 120.0), direct)
    return out[()] if out.ndim == 0 else out


def theta_length(gamma: float, tail_tol: float) -> int:
    """n_max with 2 pi gamma**(n_max+1) / (1 - gamma) <= tail_tol."""
    return max(1, math.ceil(math.log(tail_tol * (1.0 - gamma) / (2.0 * math.pi)) / math.log(gamma)))


@dataclass(frozen=True)
class ThetaEvaluator:
    wf: WeierstrassFunction
    tail_tol: float | None = None
    n_max: int = field(init=False)

    def __post_init__(self):
        tol = self.wf.tail_tol if self.tail_tol is None else self.tail_tol
        if not tol > 0:
            raise DomainError(f"tail_tol must be positive, got {tol}")
        object.__setattr__(self, "tail_tol", tol)
        object.__setattr__(self, "n_max", theta_length(self.wf.gamma, tol))

    @property
    def gamma(self) -> float:
        return self.wf.gamma

    @property
    def sup_bound(self) -> float:
        """Termwise bound 2 pi gamma / (1 - gamma) on |Theta_z| and |X3|."""
        return 2.0 * math.pi * self.gamma / (1.0 - self.gamma)


def slope_bound(wf: WeierstrassFunction) -> float:
    """K1 = deriv_bound * gamma / (1 - gamma): common Lipschitz constant of all fibres."""
    return wf.ridge.deriv_bound * wf.gamma / (1.0 - wf.gamma)


def resolve_digits(xi, b: int, n: int) -> np.ndarray:
    """Digit array of shape (m, >= n) for any accepted xi representation."""
    if isinstance(xi, DigitWord):
        if xi.base != b:
            raise DomainError(f"digit word has base {xi.base}, expected {b}")
        arr = xi.as_array()[None, :]
    elif isinstance(xi, np.ndarray) and np.issubdtype(xi.dtype, np.integer):
        arr = xi if xi.ndim == 2 else xi[None, :]
        arr = np.ascontiguousarray(arr, dtype=np.int8)
    else:
        return xi_digits(xi, b, n)
    if arr.shape[1] < n:
        raise DomainError(f"need {n} digits, got {arr.shape[1]}")
    return arr


def _flat(a) -> np.ndarray:
    return np.ascontiguousarray(np.atleast_1d(np.asarray(a, dtype=float)).ravel())


def _common_length(digits: np.ndarray, *arrays: np.ndarray) -> int:
    sizes = {digits.shape[0], *(a.size for a in arrays)} - {1}
    if len(sizes) > 1:
        raise DomainError(f"xi and coordinate arrays do not broadcast: sizes {sorted(sizes)}")
    return sizes.pop() if sizes else 1


def _stretch(a: np.ndarray, m: int) -> np.ndarray:
    return a if a.size == m else np.full(m, a[0])


def _single_xi(xi) -> bool:
    if isinstance(xi, DigitWord):
        return True
    if isinstance(xi, np.ndarray) and np.issubdtype(xi.dtype, np.integer):
        return xi.ndim == 1
    return np.ndim(xi) == 0


def _shape_out(out, xi, *inputs):
    """Collapse to a float when every input describes a single point."""
    if _single_xi(xi) and all(np.ndim(v) == 0 for v in inputs):
        return float(out[0])
    return out


def X3(wf: WeierstrassFunction, xi, x, n_terms: int | None = None):
    """Third component of the strong stable field, truncated to n_max terms."""
    n = ThetaEvaluator(wf).n_max if n_terms is None else int(n_terms)
    digits = resolve_digits(xi, wf.b, n)
    xs = _flat(x)
    xs = _stretch(xs, _common_length(digits, xs))
    out, jumps = _kernels.x3_sum(xs, digits, wf.b, wf.gamma, n, wf.ridge.code)
    if wf.ridge is Ridge.PIECEWISE_LINEAR and jumps.any():
        raise DomainError("orbit point x_n hits a derivative jump of the piecewise linear ridge")
    return _shape_out(out, xi, x)


def theta_partial(ev: ThetaEvaluator, xi, x, z, n_start: int, n_stop: int):
    """sum_{n=n_start}^{n_stop} gamma**n s(z/b**n) sin(2 pi (x_n + z/(2 b**n)))."""
    if ev.wf.ridge is not Ridge.COSINE:
        raise DomainError("theta_z needs the cosine ridge; use bernoulli_theta for the piecewise linear case")
    digits = resolve_digits(xi, ev.wf.b, n_stop)
    xs, zs = _flat(x), _flat(z)
    if np.any(np.abs(zs) > 1.0):
        raise DomainError("|z| must be <= 1")
    xs = _stretch(xs, _common_length(digits, xs, zs))
    out = _kernels.theta_sum(xs, digits, zs, ev.wf.b, ev.gamma, int(n_start), int(n_stop))
    return out


def theta_z(ev: ThetaEvaluator, xi, x, z):
    """Theta_z(xi, x) truncated at n_max (error <= ev.tail_tol)."""
    out = theta_partial(ev, xi, x, z, 1, ev.n_max)
    return _shape_out(out, xi, x, z)


def bernoulli_length(gamma: float, tol: float) -> int:
    return max(1, math.ceil(math.log(tol * (1.0 - gamma)) / math.log(gamma)))


def bernoulli_theta(gamma: float, xi, tol: float = 1e-12, b: int = 2):
    """Theta(xi) = sum_{n>=1} gamma**n (-1)**k(xi_{n-1}), error <= tol."""
    if b != 2:
        raise DomainError("the Bernoulli convolution Theta(xi) is defined for b = 2 only")
    if not 0.0 < gamma < 1.0:
        raise DomainError(f"gamma must lie in (0, 1), got {gamma}")
    n = bernoulli_length(gamma, tol)
    digits = resolve_digits(xi, 2, n)[:, :n]
    signs = 1.0 - 2.0 * digits.astype(float)
    out = signs @ (gamma ** np.arange(1, n + 1))
    return _shape_out(out, xi)


def _fiber_increment_quad(wf, digits, x, v, quad_tol, n_terms):
    a, c = _flat(x), _flat(v)
    m = _common_length(digits, a, c)
    a, c = _stretch(a, m), _stretch(c, m)
    vals, errs, ok = _kernels.integrate_x3_many(
        np.ascontiguousarray(a), np.ascontiguousarray(c),
        digits, wf.b, wf.gamma, n_terms, wf.ridge.code, quad_tol, QUAD_MAX_DEPTH, QUAD_MAX_PANELS)
    if not ok.all():
        raise QuadratureError("adaptive Simpson did not converge within its depth/panel budget",
                              float(errs.max()))
    return vals


def fiber_offset(wf: WeierstrassFunction, xi, x, v, quad_tol: float = DEFAULT_QUAD_TOL,
                 method: str = "quad"):
    """Increment l(v) - l(x) of the strong stable fibre through (xi, x, .).

    ``method="quad"`` integrates X3 by adaptive Simpson; ``method="closed"``
    uses (v - x) Theta_{v-x}(xi, x) (cosine) or -(v - x) Theta(xi) (piecewise
    linear, b = 2).
    """
    ev = ThetaEvaluator(wf)
    if method == "closed":
        z = np.asarray(v, dtype=float) - np.asarray(x, dtype=float)
        if wf.ridge is Ridge.COSINE:
            out = z * theta_z(ev, xi, x, z)
        else:
            out = -z * bernoulli_theta(wf.gamma, xi, ev.tail_tol, wf.b)
        return _shape_out(np.atleast_1d(out), xi, x, v)
    if method != "quad":
        raise DomainError(f"unknown method {method!r}")
    digits = resolve_digits(xi, wf.b, ev.n_max)
    out = _fiber_increment_quad(wf, digits, x, v, quad_tol, ev.n_max)
    return _shape_out(out, xi, x, v)


@dataclass(frozen=True)
class FiberOffset:
    """The fibre l^ss through (xi, x, y) as a callable v -> l^ss(v)."""

    wf: WeierstrassFunction
    xi: float
    x: float
    y: float
    quad_tol: float = DEFAULT_QUAD_TOL

    def __call__(self, v, method: str = "quad"):
        return self.y + fiber_offset(self.wf, self.xi, self.x, v, self.quad_tol, method)


def delta(wf: WeierstrassFunction, xi, x, x_prime):
    """Signed vertical distance Delta_xi(x, x') of the fibres anchored on the graph."""
    x = np.asarray(x, dtype=float)
    x_prime = np.asarray(x_prime, dtype=float)
    z = x_prime - x
    dw = eval_W(wf, x_prime) - eval_W(wf, x)
    if wf.ridge is Ridge.COSINE:
        out = dw - z * theta_z(ThetaEvaluator(wf), xi, x, z)
    else:
        out = dw + z * bernoulli_theta(wf.gamma, xi, wf.tail_tol, wf.b)
    return _shape_out(np.atleast_1d(out), xi, x, x_prime)


def delta_oracle(wf: WeierstrassFunction, xi, x, x_prime, quad_tol: float = DEFAULT_QUAD_TOL):
    """Delta_xi(x, x') with the fibre increment integrated numerically from X3."""
    x = np.asarray(x, dtype=float)
    x_prime = np.asarray(x_prime, dtype=float)
    dw = eval_W(wf, x_prime) - eval_W(wf, x)
    return _shape_out(np.atleast_1d(dw - fiber_offset(wf, xi, x, x_prime, quad_tol, "quad")), xi, x, x_prime)
