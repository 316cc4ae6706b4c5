"""Double-double helpers for phase computation.

Error-free transforms (Dekker/Knuth) plus the few compound operations the
phase pipeline needs: exact products of doubles, a double-double square
root, and reduction mod 1.  All functions are numba-jitted and usable both
from Python and from inside other jitted kernels.

A double-double value is an unevaluated sum hi + lo with |lo| <= ulp(hi)/2.
Relative accuracy of the compound ops here is ~2^-104, which keeps the
phase error of alpha0 * r * sqrt(n t) below 1e-20 for every admissible
desk-scale input (t <= 1e12, n <= 1e6, r <= 1e6).
"""

import math

from numba import njit

_SPLITTER = 134217729.0  # 2^27 + 1, Dekker split constant; operands must be < 2^996


@njit(cache=True)
def two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


@njit(cache=True)
def quick_two_sum(a, b):
    # requires |a| >= |b|
    s = a + b
    return s, b - (s - a)


@njit(cache=True)
def split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


@njit(cache=True)
def two_prod(a, b):
    # p + err == a * b exactly
    p = a * b
    ah, al = split(a)
    bh, bl = split(b)
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, err


@njit(cache=True)
def dd_mul(ah, al, bh, bl):
    p, e = two_prod(ah, bh)
    e += ah * bl
    e += al * bh
    return quick_two_sum(p, e)


@njit(cache=True)
def dd_mul_d(ah, al, b):
    p, e = two_prod(ah, b)
    e += al * b
    return quick_two_sum(p, e)


@njit(cache=True)
def dd_add(ah, al, bh, bl):
    s, e = two_sum(ah, bh)
    e += al + bl
    return quick_two_sum(s, e)


@njit(cache=True)
def dd_sqrt(ah, al):
    """Square root of the double-double (ah, al), ah >= 0."""
    if ah == 0.0:
        return 0.0, 0.0
    s = math.sqrt(ah)
    # one Newton correction using an exact s*s
    p, e = two_prod(s, s)
    d = ((ah - p) - e) + al
    return quick_two_sum(s, d / (2.0 * s))


@njit(cache=True)
def dd_frac(h, l):
    """Fractional part of h + l, returned as a double-double in [0, 1)."""
    f = h - math.floor(h)
    s, e = two_sum(f, l)
    if s >= 1.0:
        s -= 1.0
    elif s < 0.0:
        s += 1.0
    return s, e


@njit(cache=True)
def sqrt_int_dd(n):
    """sqrt(n) for an exact integer n < 2^53, as a double-double."""
    return dd_sqrt(float(n), 0.0)
