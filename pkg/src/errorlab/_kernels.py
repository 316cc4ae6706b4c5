"""Numba hot loops shared by series evaluation, model sampling, and
transform quadrature.

All loops write per-slot outputs only (no cross-iteration reductions), so
results are independent of execution order and thread count.  Phases are
reduced mod 1 in double-double arithmetic before entering the cosine
recurrence; the recurrence itself costs ~8 flops per term and no
transcendental calls.
"""

import math

import numpy as np
from numba import njit

from ._dd import dd_frac, dd_mul, dd_mul_d, dd_sqrt, two_sum
from .rng import STREAM_MODEL, uniform

TWO_PI = 2.0 * math.pi


@njit(cache=True)
def _inner_cosine_sum(coeffs, lo, hi, theta, cos_b, sin_b):
    # sum over r of coeffs[lo + r - 1] * cos(r*theta + beta0), r = 1..hi-lo
    c1 = math.cos(theta)
    s1 = math.sin(theta)
    cp = c1
    sp = s1
    a = 0.0
    b = 0.0
    for j in range(lo, hi):
        c = coeffs[j]
        a += c * cp
        b += c * sp
        cn = cp * c1 - sp * s1
        sn = sp * c1 + cp * s1
        cp = cn
        sp = sn
    return a * cos_b - b * sin_b


@njit(cache=True)
def series_scan(ts, sq_hi, sq_lo, a0_hi, a0_lo, offsets, coeffs, cos_b, sin_b, out):
    """out[i] = sum over kernels k of inner cosine sums at phase
    frac(alpha0 * sqrt(n_k) * sqrt(t_i))."""
    nk = sq_hi.size
    for i in range(ts.size):
        th, tl = dd_sqrt(ts[i], 0.0)
        acc = 0.0
        for k in range(nk):
            ph, pl = dd_mul(sq_hi[k], sq_lo[k], th, tl)
            ph, pl = dd_mul(ph, pl, a0_hi, a0_lo)
            fh, fl = dd_frac(ph, pl)
            theta = TWO_PI * (fh + fl)
            acc += _inner_cosine_sum(coeffs, offsets[k], offsets[k + 1], theta, cos_b, sin_b)
        out[i] = acc
    return out


@njit(cache=True)
def model_scan(count, seed, start_index, stream, offsets, coeffs, cos_b, sin_b, out):
    """out[i] = model value for sample start_index + i; one uniform phase
    per kernel drawn from the counter-based generator."""
    nk = offsets.size - 1
    for i in range(count):
        idx = start_index + i
        acc = 0.0
        for k in range(nk):
            x = uniform(seed, idx, k, stream)
            theta = TWO_PI * x
            acc += _inner_cosine_sum(coeffs, offsets[k], offsets[k + 1], theta, cos_b, sin_b)
        out[i] = acc
    return out


@njit(cache=True)
def kernel_profile(offsets, coeffs, k, thetas, cos_b, sin_b, out):
    """out[j] = inner cosine sum of kernel k at angle thetas[j] (radians)."""
    for j in range(thetas.size):
        out[j] = _inner_cosine_sum(coeffs, offsets[k], offsets[k + 1], thetas[j], cos_b, sin_b)
    return out


@njit(cache=True)
def ungrouped_scan(ts, dvals, out):
    """Ungrouped divisor sum over n <= M at each t:
    (1/(pi sqrt 2)) * sum d(n) n^{-3/4} cos(4 pi sqrt(n t) - pi/4)."""
    amp = 1.0 / (math.pi * math.sqrt(2.0))
    cos_b = math.cos(-math.pi / 4.0)
    sin_b = math.sin(-math.pi / 4.0)
    for i in range(ts.size):
        th, tl = dd_sqrt(ts[i], 0.0)
        acc = 0.0
        for n in range(1, dvals.size):
            sh, sl = dd_sqrt(float(n), 0.0)
            ph, pl = dd_mul(sh, sl, th, tl)
            ph, pl = dd_mul_d(ph, pl, 2.0)
            fh, fl = dd_frac(ph, pl)
            theta = TWO_PI * (fh + fl)
            c = math.cos(theta)
            s = math.sin(theta)
            acc += dvals[n] * n ** -0.75 * (c * cos_b - s * sin_b)
        out[i] = amp * acc
    return out


@njit(cache=True)
def count_exceed(values, v):
    n = 0
    for i in range(values.size):
        if values[i] > v:
            n += 1
    return n
