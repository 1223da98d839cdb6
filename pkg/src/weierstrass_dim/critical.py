"""Critical parameter lambda_b: the unique zero of h_b on (1/b, 1)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import DomainError

POLE_MARGIN = 1e-9
SCAN_POINTS = 64


def _poles(b: int) -> tuple[float, ...]:
    return (0.5, 0.25) if b == 2 else (1.0 / b, 1.0 / b**2)


def h_b(b: int, lam: float) -> float:
    """The function whose zero is lambda_b; separate closed forms for b = 2 and b >= 3."""
    if b < 2:
        raise DomainError(f"b must be >= 2, got {b}")
    if not (1.0 / b < lam < 1.0):
        raise DomainError(f"lambda must lie in (1/b, 1), got {lam!r}")
    for p in _poles(b):
        if abs(lam - p) < POLE_MARGIN:
            raise DomainError(f"lambda = {lam!r} is within {POLE_MARGIN} of the pole {p}")
    if b == 2:
        return (1.0 / (4 * lam**2 * (2 * lam - 1) ** 2)
                + 1.0 / (16 * lam**2 * (4 * lam - 1) ** 2)
                - 5.0 / (64 * lam**2)
                + math.sqrt(2.0) / (2 * lam)
                - 1.0)
    return 1.0 / (b * lam - 1) ** 2 + 1.0 / (b * b * lam - 1) ** 2 - math.sin(math.pi / b) ** 2


@dataclass(frozen=True)
class CriticalResult:
    b: int
    lambda_b: float
    residual: float
    iterations: int
    bracket: tuple[float, float]


class BracketError(DomainError):
    def __init__(self, message, scan):
        table = "\n".join(f"  {lam:.12f}  {h:+.6e}" for lam, h in scan)
        super().__init__(f"{message}\nscan table (lambda, h_b):\n{table}")
        self.scan = scan


def _scan(b: int) -> list[tuple[float, float]]:
    # geometric in the distance from the left pole 1/b, where h_b blows up
    span = 1.0 - 1.0 / b - POLE_MARGIN
    lams = [1.0 / b + d for d in np.geomspace(2 * POLE_MARGIN, span, SCAN_POINTS)]
    lams[-1] = min(lams[-1], 1.0 - POLE_MARGIN)
    return [(float(lam), h_b(b, float(lam))) for lam in lams]


def solve_lambda_b(b: int, tol: float = 1e-14) -> CriticalResult:
    """Bracket the single sign change of h_b by a 64-point scan, then bisect to width tol."""
    if b < 2:
        raise DomainError(f"b must be >= 2, got {b}")
    if tol < 1e-14:
        raise DomainError(f"tol must be >= 1e-14, got {tol}")
    scan = _scan(b)
    changes = [i for i in range(len(scan) - 1)
               if np.sign(scan[i][1]) != np.sign(scan[i + 1][1])]
    if not changes:
        raise BracketError(f"no sign change of h_{b} found on (1/b, 1)", scan)
    if len(changes) > 1:
        raise BracketError(f"{len(changes)} sign changes of h_{b} found; zero is not unique", scan)
    i = changes[0]
    lo, hi = scan[i][0], scan[i + 1][0]
    f_lo = scan[i][1]
    iterations = 0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        f_mid = h_b(b, mid)
        iterations += 1
        if f_mid == 0.0:
            lo = hi = mid
            break
        if np.sign(f_mid) == np.sign(f_lo):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    root = 0.5 * (lo + hi)
    return CriticalResult(b, root, abs(h_b(b, root)), iterations, (lo, hi))
