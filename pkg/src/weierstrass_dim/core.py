"""Parameters, ridge functions and truncated evaluation of the Weierstrass series.

``W(x) = sum_n lam**n * g(b**n x)`` with ``g`` either ``cos(2 pi u)`` or the
distance to the nearest integer.  ``b**n x`` is never formed: the argument is
carried as ``u_{n+1} = b u_n mod 1`` so every intermediate stays in [0, b).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels


class DomainError(ValueError):
    """A precondition on a parameter or argument is violated."""


@dataclass(frozen=True)
class SystemParams:
    """Integer base ``b`` and amplitude ratio ``lam`` with ``1/b < lam < 1``."""

    b: int
    lam: float

    def __post_init__(self):
        if not isinstance(self.b, (int, np.integer)) or isinstance(self.b, bool):
            raise DomainError(f"b must be an integer, got {self.b!r}")
        if self.b < 2:
            raise DomainError(f"b must be >= 2, got {self.b}")
        lam = float(self.lam)
        if not (1.0 / self.b < lam < 1.0):
            raise DomainError(f"lambda must lie in (1/b, 1) = ({1.0 / self.b:.6g}, 1), got {lam!r}")
        object.__setattr__(self, "b", int(self.b))
        object.__setattr__(self, "lam", lam)

    @property
    def gamma(self) -> float:
        """Fibre contraction ratio 1/(b lam), in (0, 1)."""
        return 1.0 / (self.b * self.lam)

    @property
    def dim_D(self) -> float:
        return dimension_formula(self)


def dimension_formula(params: SystemParams) -> float:
    """Box dimension ``2 + log(lam)/log(b)`` of the graph."""
    return 2.0 + math.log(params.lam) / math.log(params.b)


class Ridge(enum.Enum):
    COSINE = "cos"
    PIECEWISE_LINEAR = "pwl"

    @property
    def code(self) -> int:
        return _kernels.COSINE if self is Ridge.COSINE else _kernels.PIECEWISE_LINEAR

    @property
    def deriv_bound(self) -> float:
        return 2.0 * math.pi if self is Ridge.COSINE else 1.0

    @property
    def sup_bound(self) -> float:
        return 1.0 if self is Ridge.COSINE else 0.5

    @classmethod
    def parse(cls, name: str | "Ridge") -> "Ridge":
        if isinstance(name, Ridge):
            return name
        aliases = {"cos": cls.COSINE, "cosine": cls.COSINE,
                   "pwl": cls.PIECEWISE_LINEAR, "dist": cls.PIECEWISE_LINEAR,
                   "piecewise_linear": cls.PIECEWISE_LINEAR}
        try:
            return aliases[name.lower()]
        except KeyError:
            raise DomainError(f"unknown ridge {name!r}; use 'cos' or 'pwl'") from None


# alternative name for the ridge record
RidgeFunction = Ridge


def eval_ridge(ridge: Ridge, u, order: int = 0):
    """g(u) (order 0) or g'(u) (order 1), with u reduced mod 1.

    The piecewise linear derivative is ``(-1)**floor(2u)``; asking for it at
    u in {0, 1/2} raises :class:`DomainError`.
    """
    ridge = Ridge.parse(ridge)
    u = np.asarray(u, dtype=float)
    u = u - np.floor(u)
    if order == 0:
        out = np.cos(2.0 * np.pi * u) if ridge is Ridge.COSINE else np.minimum(u, 1.0 - u)
    elif order == 1:
        if ridge is Ridge.COSINE:
            out = -2.0 * np.pi * np.sin(2.0 * np.pi * u)
        else:
            if np.any((u == 0.0) | (u == 0.5)):
                raise DomainError("derivative undefined at jump (u in {0, 1/2})")
            out = np.where(np.floor(2.0 * u) % 2 == 0, 1.0, -1.0)
    else:
        raise DomainError(f"order must be 0 or 1, got {order}")
    return out[()] if out.ndim == 0 else out


def series_length(lam: float, tail_tol: float) -> int:
    """Smallest N with lam**N / (1 - lam) <= tail_tol (|g| <= 1)."""
    return max(1, math.ceil(math.log(tail_tol * (1.0 - lam)) / math.log(lam)))


@dataclass(frozen=True)
class WeierstrassFunction:
    params: SystemParams
    ridge: Ridge = Ridge.COSINE
    tail_tol: float = 1e-12
    n_terms: int = field(init=False)

    def __post_init__(self):
        if not self.tail_tol > 0:
            raise DomainError(f"tail_tol must be positive, got {self.tail_tol}")
        object.__setattr__(self, "ridge", Ridge.parse(self.ridge))
        object.__setattr__(self, "n_terms", series_length(self.params.lam, self.tail_tol))

    @classmethod
    def create(cls, b: int, lam: float, ridge="cos", tail_tol: float = 1e-12):
        return cls(SystemParams(b, lam), Ridge.parse(ridge), tail_tol)

    @property
    def b(self) -> int:
        return self.params.b

    @property
    def lam(self) -> float:
        return self.params.lam

    @property
    def gamma(self) -> float:
        return self.params.gamma

    @property
    def dim_D(self) -> float:
        return self.params.dim_D

    @property
    def amplitude_bound(self) -> float:
        """sup |W| <= sup|g| / (1 - lam)."""
        return self.ridge.sup_bound / (1.0 - self.lam)

    @property
    def holder_constant(self) -> float:
        """C_H with |W(x) - W(y)| <= C_H |x - y|**(2 - D) for |x - y| small.

        Splits the series where b**n |x - y| ~ 1: the head is bounded through
        the derivative, the tail through the amplitude of g.
        """
        return (self.ridge.deriv_bound / (self.b * self.lam - 1.0)
                + 2.0 * self.ridge.sup_bound / (1.0 - self.lam))

    def __call__(self, x):
        return eval_W(self, x)

    def tau(self, u):
        return base_tau(self.b, u)


def base_tau(b: int, u):
    """Float expanding map u -> b u mod 1, identical to the step used inside W."""
    u = np.asarray(u, dtype=float)
    p = b * u
    k = np.minimum(np.floor(p), b - 1)
    out = p - k
    return out[()] if out.ndim == 0 else out


def eval_W(wf: WeierstrassFunction, x):
    """Partial sum of the series over ``wf.n_terms`` terms, absolute error <= tail_tol."""
    arr = np.ascontiguousarray(np.atleast_1d(np.asarray(x, dtype=float)))
    out = _kernels.weierstrass_sum(arr.ravel(), wf.b, wf.lam, wf.n_terms, wf.ridge.code)
    if np.ndim(x) == 0:
        return float(out[0])
    return out.reshape(arr.shape)


def functional_equation_residual(wf: WeierstrassFunction, x):
    """|lam W(tau x) - (W(x) - g(x))|; bounded by 3 * tail_tol."""
    x = np.asarray(x, dtype=float)
    lhs = wf.lam * eval_W(wf, base_tau(wf.b, x))
    rhs = eval_W(wf, x) - eval_ridge(wf.ridge, x, 0)
    return np.abs(lhs - rhs)
