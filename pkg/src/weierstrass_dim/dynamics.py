"""The b-baker map, its skew products and orbit bookkeeping.

The baker map ``B(xi, x) = (b xi mod 1, (x + k(xi)) / b)`` expands the first
coordinate and contracts the second; the digit ``k(xi) = floor(b xi)`` that
leaves xi enters x.  Backward steps move one digit the other way.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import _kernels
from .core import DomainError, WeierstrassFunction, base_tau, eval_ridge

MAX_ORBIT_LENGTH = 10**6
IDENTITY_WINDOW = 30


def base_map(b: int, u: float) -> tuple[float, int]:
    """(tau(u), k(u)) = (b u mod 1, floor(b u)) with the left-closed digit convention."""
    if not 0.0 <= u < 1.0:
        raise DomainError(f"u must lie in [0, 1), got {u!r}")
    t, k = _kernels.expand(float(u), int(b))
    return t, k


def _in_cell(v: float, k: int, b: int) -> float:
    """(x + k)/b nudged by ulps so that floor(b v) = k.

    Rounding can push the quotient across a cell edge j/b (e.g. (0 + 1)/3
    lands just below 1/3), which would break k(xi_i) = k(x_{i+1}).
    """
    while math.floor(b * v) < k:
        v = math.nextafter(v, 1.0)
    while v > 0.0 and math.floor(b * v) > k:
        v = math.nextafter(v, 0.0)
    return v


def _in_cell_array(v: np.ndarray, k: np.ndarray, b: int) -> np.ndarray:
    v = np.array(v, dtype=float, copy=True)
    for _ in range(4):
        low = np.floor(b * v) < k
        high = (np.floor(b * v) > k) & (v > 0.0)
        if not (low.any() or high.any()):
            break
        v[low] = np.nextafter(v[low], 1.0)
        v[high] = np.nextafter(v[high], 0.0)
    return v


@dataclass(frozen=True)
class OrbitState:
    xi: float
    x: float
    base: int

    def __post_init__(self):
        if self.base < 2:
            raise DomainError(f"base must be >= 2, got {self.base}")
        if not (0.0 <= self.xi < 1.0 and 0.0 <= self.x < 1.0):
            raise DomainError(f"state coordinates must lie in [0, 1): ({self.xi!r}, {self.x!r})")


def baker_forward(s: OrbitState) -> OrbitState:
    tau_xi, k = base_map(s.base, s.xi)
    return OrbitState(tau_xi, _in_cell((s.x + k) / s.base, k, s.base), s.base)


def baker_backward(s: OrbitState) -> OrbitState:
    tau_x, k = base_map(s.base, s.x)
    return OrbitState(_in_cell((s.xi + k) / s.base, k, s.base), tau_x, s.base)


def orbit_segment(s: OrbitState, n: int) -> list[OrbitState]:
    """States B^i(s) for i = 0..n (n > 0) or i = 0..n going backward (n < 0)."""
    if abs(n) > MAX_ORBIT_LENGTH:
        raise DomainError(f"|n| must be <= {MAX_ORBIT_LENGTH}; stream longer orbits with iter_orbit")
    return list(iter_orbit(s, n))


def iter_orbit(s: OrbitState, n: int):
    step = baker_forward if n >= 0 else baker_backward
    yield s
    for _ in range(abs(n)):
        s = step(s)
        yield s


def baker_map(xi, x, b: int):
    """Vectorised forward baker map on arrays of states."""
    xi = np.asarray(xi, dtype=float)
    x = np.asarray(x, dtype=float)
    p = b * xi
    k = np.minimum(np.floor(p), b - 1)
    x1 = _in_cell_array((x + k) / b, k, b)
    return p - k, x1


def baker_map_inverse(xi, x, b: int):
    x = np.asarray(x, dtype=float)
    xi = np.asarray(xi, dtype=float)
    p = b * x
    k = np.minimum(np.floor(p), b - 1)
    xi1 = _in_cell_array((xi + k) / b, k, b)
    return xi1, p - k


@dataclass(frozen=True)
class DigitWord:
    """Finite b-ary digit word k(xi), k(tau xi), ... of the expanding coordinate."""

    digits: tuple[int, ...]
    base: int

    def __post_init__(self):
        digits = tuple(int(d) for d in self.digits)
        if self.base < 2:
            raise DomainError(f"base must be >= 2, got {self.base}")
        bad = [d for d in digits if not 0 <= d < self.base]
        if bad:
            raise DomainError(f"digits out of range for base {self.base}: {bad[:5]}")
        object.__setattr__(self, "digits", digits)

    @classmethod
    def from_real(cls, xi: float, base: int, n: int) -> "DigitWord":
        if not 0.0 <= xi < 1.0:
            raise DomainError(f"xi must lie in [0, 1), got {xi!r}")
        row = _kernels.expansion_digits(np.array([float(xi)]), int(base), int(n))[0]
        return cls(tuple(int(d) for d in row), base)

    def __len__(self) -> int:
        return len(self.digits)

    def k_n(self, n: int) -> int:
        """Exact integer sum_{i<n} b**i digits[i]."""
        if n > len(self.digits):
            raise DomainError(f"need {n} digits, word has {len(self.digits)}")
        return sum(d * self.base**i for i, d in enumerate(self.digits[:n]))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.digits, dtype=np.int8)

    def shifted(self, n: int) -> "DigitWord":
        """Digits of tau^n(xi)."""
        return DigitWord(self.digits[n:], self.base)

    def prepended(self, head: Sequence[int]) -> "DigitWord":
        return DigitWord(tuple(head) + self.digits, self.base)

    def to_real(self) -> float:
        """xi represented by the word (Horner from the last digit)."""
        v = 0.0
        for d in reversed(self.digits):
            v = (v + d) / self.base
        return v


def xi_digits(xi, b: int, n: int) -> np.ndarray:
    """Digit array of shape (m, n) for an array of xi, via the float expanding map."""
    arr = np.ascontiguousarray(np.atleast_1d(np.asarray(xi, dtype=float)))
    if np.any((arr < 0.0) | (arr >= 1.0)):
        raise DomainError("xi must lie in [0, 1)")
    return _kernels.expansion_digits(arr, int(b), int(n))


class KnCheck(NamedTuple):
    k_n: int
    x_n: float
    residual: float | None


def contracting_coordinate(word: DigitWord, x: float, n: int) -> float:
    """x_n from x_{i+1} = (x_i + k(xi_i)) / b; the closed form with b**n is not used."""
    if n > len(word):
        raise DomainError(f"need {n} digits, word has {len(word)}")
    for d in word.digits[:n]:
        x = (x + d) / word.base
    return x


def k_n_exact(word: DigitWord, x: float, n: int) -> KnCheck:
    """k_n(xi) as an exact integer, plus the float residual of k_n = b**n x_n - x.

    The residual is only meaningful while b**n fits the float mantissa, so it
    is reported for n <= 30 and ``None`` beyond.
    """
    k = word.k_n(n)
    xn = contracting_coordinate(word, x, n)
    residual = None
    if n <= IDENTITY_WINDOW:
        residual = abs(k - (float(word.base) ** n * xn - x))
    return KnCheck(k, xn, residual)


def skew_step_F(wf: WeierstrassFunction, xi: float, x: float, y: float) -> tuple[float, float, float]:
    """F(xi, x, y) = (B(xi, x), lam y + g((x + k(xi)) / b))."""
    s = baker_forward(OrbitState(xi, x, wf.b))
    return s.xi, s.x, wf.lam * y + float(eval_ridge(wf.ridge, s.x, 0))


def skew_step_Phi(wf: WeierstrassFunction, u: float, v: float) -> tuple[float, float]:
    """Phi(u, v) = (b u mod 1, (v - g(u)) / lam); the graph of W is its repellor."""
    return float(base_tau(wf.b, u)), (v - float(eval_ridge(wf.ridge, u, 0))) / wf.lam
