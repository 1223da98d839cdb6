"""Compiled inner loops.

Everything here works on flat float64 / int8 arrays and scalar parameters so
that the public modules can stay readable numpy.  The ridge is encoded as an
int: 0 for cosine, 1 for the piecewise linear distance-to-integers.
"""

import math

import numba as nb
import numpy as np

TWO_PI = 2.0 * math.pi
COSINE = 0
PIECEWISE_LINEAR = 1

# below this |t| the kernel 2 sin(pi t)/t switches to its Taylor polynomial
S_TAYLOR_CUTOFF = 1e-4


@nb.njit(cache=True, nogil=True)
def s_value(t):
    if abs(t) < S_TAYLOR_CUTOFF:
        pt2 = (math.pi * t) ** 2
        return TWO_PI * (1.0 - pt2 / 6.0 + pt2 * pt2 / 120.0)
    return 2.0 * math.sin(math.pi * t) / t


@nb.njit(cache=True, nogil=True)
def ridge_value(u, kind):
    if kind == COSINE:
        return math.cos(TWO_PI * u)
    return min(u, 1.0 - u)


@nb.njit(cache=True, nogil=True)
def expand(u, b):
    """One step of u -> b*u mod 1, returning (tau(u), k(u))."""
    p = b * u
    k = math.floor(p)
    if k > b - 1:
        k = b - 1
    return p - k, int(k)


@nb.njit(cache=True, nogil=True)
def weierstrass_sum(x, b, lam, n_terms, kind):
    out = np.empty(x.size)
    for i in range(x.size):
        u = x[i] - math.floor(x[i])
        acc = 0.0
        c = 1.0
        for _ in range(n_terms):
            acc += c * ridge_value(u, kind)
            u, _k = expand(u, b)
            c *= lam
        out[i] = acc
    return out


@nb.njit(cache=True, nogil=True)
def expansion_digits(xi, b, n):
    out = np.empty((xi.size, n), dtype=np.int8)
    for i in range(xi.size):
        u = xi[i]
        for j in range(n):
            u, k = expand(u, b)
            out[i, j] = k
    return out


@nb.njit(cache=True, nogil=True)
def theta_sum(x, digits, z, b, gamma, n_start, n_stop):
    """sum_{n=n_start}^{n_stop} gamma^n s(z/b^n) sin(2 pi (x_n + z/(2 b^n))).

    ``digits`` has one row per point or a single shared row; ``z`` has one
    entry per point or a single shared entry.  x_n is built by the
    contracting recursion x_n = (x_{n-1} + k(xi_{n-1})) / b.
    """
    m = x.size
    shared_digits = digits.shape[0] == 1
    shared_z = z.size == 1
    out = np.empty(m)
    for i in range(m):
        row = 0 if shared_digits else i
        zi = z[0] if shared_z else z[i]
        xn = x[i]
        bn = 1.0
        gn = 1.0
        acc = 0.0
        for n in range(1, n_stop + 1):
            xn = (xn + digits[row, n - 1]) / b
            bn *= b
            gn *= gamma
            if n >= n_start:
                acc += gn * s_value(zi / bn) * math.sin(TWO_PI * (xn + zi / (2.0 * bn)))
        out[i] = acc
    return out


@nb.njit(cache=True, nogil=True)
def x3_point(t, digits, row, b, gamma, n_terms, kind):
    """X_3 at a single abscissa; returns (value, hit_jump)."""
    xn = t
    gn = 1.0
    acc = 0.0
    jump = False
    for n in range(1, n_terms + 1):
        xn = (xn + digits[row, n - 1]) / b
        gn *= gamma
        if kind == COSINE:
            acc += gn * TWO_PI * math.sin(TWO_PI * xn)
        else:
            if xn == 0.0 or xn == 0.5:
                jump = True
            acc -= gn * (1.0 if math.floor(2.0 * xn) % 2 == 0 else -1.0)
    return acc, jump


@nb.njit(cache=True, nogil=True)
def x3_sum(t, digits, b, gamma, n_terms, kind):
    m = t.size
    shared = digits.shape[0] == 1
    out = np.empty(m)
    jumps = np.zeros(m, dtype=np.bool_)
    for i in range(m):
        row = 0 if shared else i
        out[i], jumps[i] = x3_point(t[i], digits, row, b, gamma, n_terms, kind)
    return out, jumps


@nb.njit(cache=True, nogil=True)
def _simpson(fa, fm, fb, h):
    return h * (fa + 4.0 * fm + fb) / 6.0


@nb.njit(cache=True, nogil=True)
def integrate_x3(a, c, digits, row, b, gamma, n_terms, kind, tol, max_depth, max_panels):
    """Adaptive interval-halving Simpson for int_a^c X_3(xi, t) dt.

    Returns (value, error_estimate, converged).  Uses an explicit stack; each
    accepted panel gets the Richardson-corrected value.  Past ``max_panels``
    subdivisions every remaining panel is accepted as is and the result is
    flagged unconverged.
    """
    if a == c:
        return 0.0, 0.0, True
    sign = 1.0
    lo, hi = a, c
    if hi < lo:
        lo, hi = hi, lo
        sign = -1.0
    cap = 2 * max_depth + 8
    s_lo = np.empty(cap)
    s_hi = np.empty(cap)
    s_flo = np.empty(cap)
    s_fmid = np.empty(cap)
    s_fhi = np.empty(cap)
    s_whole = np.empty(cap)
    s_tol = np.empty(cap)
    s_depth = np.empty(cap, dtype=np.int64)

    f_lo = x3_point(lo, digits, row, b, gamma, n_terms, kind)[0]
    f_hi = x3_point(hi, digits, row, b, gamma, n_terms, kind)[0]
    mid = 0.5 * (lo + hi)
    f_mid = x3_point(mid, digits, row, b, gamma, n_terms, kind)[0]
    top = 0
    s_lo[0] = lo
    s_hi[0] = hi
    s_flo[0] = f_lo
    s_fmid[0] = f_mid
    s_fhi[0] = f_hi
    s_whole[0] = _simpson(f_lo, f_mid, f_hi, hi - lo)
    s_tol[0] = tol
    s_depth[0] = 0
    total = 0.0
    err = 0.0
    converged = True
    panels = 0
    while top >= 0:
        lo = s_lo[top]
        hi = s_hi[top]
        f_lo = s_flo[top]
        f_mid = s_fmid[top]
        f_hi = s_fhi[top]
        whole = s_whole[top]
        ptol = s_tol[top]
        depth = s_depth[top]
        top -= 1
        mid = 0.5 * (lo + hi)
        f_lm = x3_point(0.5 * (lo + mid), digits, row, b, gamma, n_terms, kind)[0]
        f_rm = x3_point(0.5 * (mid + hi), digits, row, b, gamma, n_terms, kind)[0]
        left = _simpson(f_lo, f_lm, f_mid, mid - lo)
        right = _simpson(f_mid, f_rm, f_hi, hi - mid)
        delta = left + right - whole
        panels += 1
        if abs(delta) <= 15.0 * ptol or depth >= max_depth or panels > max_panels:
            if abs(delta) > 15.0 * ptol:
                converged = False
            total += left + right + delta / 15.0
            err += abs(delta) / 15.0
        else:
            top += 1
            s_lo[top] = mid
            s_hi[top] = hi
            s_flo[top] = f_mid
            s_fmid[top] = f_rm
            s_fhi[top] = f_hi
            s_whole[top] = right
            s_tol[top] = 0.5 * ptol
            s_depth[top] = depth + 1
            top += 1
            s_lo[top] = lo
            s_hi[top] = mid
            s_flo[top] = f_lo
            s_fmid[top] = f_lm
            s_fhi[top] = f_mid
            s_whole[top] = left
            s_tol[top] = 0.5 * ptol
            s_depth[top] = depth + 1
    return sign * total, err, converged


@nb.njit(cache=True, nogil=True)
def integrate_x3_many(a, c, digits, b, gamma, n_terms, kind, tol, max_depth, max_panels):
    m = a.size
    shared = digits.shape[0] == 1
    vals = np.empty(m)
    errs = np.empty(m)
    ok = np.empty(m, dtype=np.bool_)
    for i in range(m):
        row = 0 if shared else i
        vals[i], errs[i], ok[i] = integrate_x3(
            a[i], c[i], digits, row, b, gamma, n_terms, kind, tol, max_depth, max_panels
        )
    return vals, errs, ok


@nb.njit(cache=True, nogil=True)
def column_oscillation(b, lam, n_terms, kind, jitter):
    """Max minus min of W over jittered strata in each column.

    ``jitter`` has shape (n_columns, samples) with entries in [0, 1); sample
    s of column j sits at (j + (s + jitter[j, s]) / samples) / n_columns.
    """
    n_columns, samples = jitter.shape
    osc = np.empty(n_columns)
    width = 1.0 / n_columns
    step = width / samples
    for j in range(n_columns):
        lo_v = math.inf
        hi_v = -math.inf
        for s in range(samples):
            x = j * width + (s + jitter[j, s]) * step
            u = x - math.floor(x)
            acc = 0.0
            c = 1.0
            for _ in range(n_terms):
                acc += c * ridge_value(u, kind)
                u, _k = expand(u, b)
                c *= lam
            if acc < lo_v:
                lo_v = acc
            if acc > hi_v:
                hi_v = acc
        osc[j] = hi_v - lo_v
    return osc
