"""Truncated cosine series of the three families, their coefficient tables,
certified phases, and the closed-form oscillatory integral.

A series value is

    c0 * sum over squarefree kernels n of n^{-3/4} *
         sum over the inner index r of a_{nr^2} * kappa(n r^2) * r^{-3/2} *
         cos(2 pi alpha0 r sqrt(n t) + beta0)

with per-family (c0, alpha0, beta0, kappa, weights):

    divisor: 1/(pi sqrt 2),  2,          -pi/4, d,    1
    circle:  -1/pi,          1,          +pi/4, r(.), 1
    zeta2:   (2/pi)^{1/4},   sqrt(2/pi), -pi/4, d,    (-1)^{n r^2}

Inner truncation: divisor r <= L (default L = N); circle q <= L with the
neglected tail bounded and recorded (the untruncated q-sum is infinite);
zeta2 n r^2 <= N^4.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import lru_cache

import mpmath as mp
import numpy as np
from numba import njit

from . import arith
from ._dd import dd_frac, dd_mul, dd_sqrt
from ._kernels import series_scan, ungrouped_scan
from .constants import MAIN_TERM_DPS
from .errors import PrecisionError, ResourceBudgetError, UsageError

FAMILIES = ("divisor", "circle", "zeta2")

_SQRT2 = math.sqrt(2.0)


def _zeta2_alpha0_dd() -> tuple[float, float]:
    with mp.workdps(40):
        a = mp.sqrt(2 / mp.pi)
        hi = float(a)
        lo = float(a - mp.mpf(hi))
    return hi, lo


_A0_ZETA2 = _zeta2_alpha0_dd()

# family -> (amplitude c0, alpha0 as dd pair, beta0)
_FAMILY = {
    "divisor": (1.0 / (math.pi * _SQRT2), (2.0, 0.0), -math.pi / 4.0),
    "circle": (-1.0 / math.pi, (1.0, 0.0), math.pi / 4.0),
    "zeta2": ((2.0 / math.pi) ** 0.25, _A0_ZETA2, -math.pi / 4.0),
}

DEFAULT_CIRCLE_INNER = 1000


@dataclass(frozen=True)
class SeriesSpec:
    """One truncated series: family plus truncation parameters.

    inner_limit: uniform cap on the inner index (divisor default N;
    circle default DEFAULT_CIRCLE_INNER).  For zeta2 the inner rule is
    n r^2 <= N^4, optionally further capped by inner_limit.
    """

    family: str
    kernel_limit: int
    inner_limit: int | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise UsageError(f"unknown family {self.family!r}")
        if self.kernel_limit < 0:
            raise UsageError("kernel_limit must be >= 0")
        if self.inner_limit is not None and self.inner_limit < 1:
            raise UsageError("inner_limit must be >= 1 when given")

    @property
    def amplitude(self) -> float:
        return _FAMILY[self.family][0]

    @property
    def alpha0(self) -> float:
        hi, lo = _FAMILY[self.family][1]
        return hi + lo

    @property
    def alpha0_dd(self) -> tuple[float, float]:
        return _FAMILY[self.family][1]

    @property
    def beta0(self) -> float:
        return _FAMILY[self.family][2]

    def resolved_inner_limit(self) -> int:
        if self.inner_limit is not None:
            return self.inner_limit
        if self.family == "circle":
            return DEFAULT_CIRCLE_INNER
        if self.family == "zeta2":
            return self.kernel_limit * self.kernel_limit  # r <= N^2 when n = 1
        return self.kernel_limit


@dataclass(frozen=True)
class CoefficientTable:
    """Flattened per-kernel coefficient arrays for one truncated series.

    coeffs[offsets[k] + r - 1] is the full coefficient of
    cos(2 pi alpha0 r sqrt(n_k t) + beta0) including amplitude, kernel
    weight and sign, for r = 1 .. offsets[k+1]-offsets[k].
    """

    family: str
    kernel_limit: int
    inner_limit: int
    include_amplitude: bool
    kernels: np.ndarray          # int64, squarefree (admissible for circle)
    offsets: np.ndarray          # int64, len(kernels)+1
    coeffs: np.ndarray           # float64
    sqrt_hi: np.ndarray          # dd sqrt of kernels
    sqrt_lo: np.ndarray
    amplitude: float
    alpha0_dd: tuple[float, float]
    beta0: float
    # circle only: worst-case bounds on the dropped q > L mass, via
    # r(n q^2) <= r(n) d(q)^2 (l1) and r(n q^2)^2 <= 4 q r(n)^2 d(q)^2 (variance)
    inner_tail_l1_bound: float = 0.0
    inner_tail_variance_bound: float = 0.0

    @property
    def term_count(self) -> int:
        return int(self.coeffs.size)

    def l1_mass(self) -> float:
        return float(np.abs(self.coeffs).sum())

    def variance(self) -> float:
        # independent kernels, E[cos^2(2 pi r X + b)] = 1/2 for every r >= 1
        return 0.5 * float(np.square(self.coeffs).sum())


@njit(cache=True)
def _fill_divisor_coeffs(kernels, inner_lens, offsets, spf, coeffs, amp0, include_amp, signed):
    for ki in range(kernels.size):
        n = kernels[ki]
        m = n
        omega = 0
        while m > 1:
            p = spf[m]
            omega += 1
            while m % p == 0:
                m //= p
        amp = n ** -0.75
        if include_amp:
            amp *= amp0
        base = offsets[ki]
        for r in range(1, inner_lens[ki] + 1):
            val = 1
            extra = omega
            rem = r
            while rem > 1:
                p = spf[rem]
                e = 0
                while rem % p == 0:
                    rem //= p
                    e += 1
                if n % p == 0:
                    val *= 2 * e + 2
                    extra -= 1
                else:
                    val *= 2 * e + 1
            dval = val * (1 << extra)
            w = 1.0
            if signed and (n & 1) == 1 and (r & 1) == 1:
                w = -1.0
            coeffs[base + r - 1] = amp * w * dval * float(r) ** -1.5


@njit(cache=True)
def _fill_circle_coeffs(kernels, inner_lens, offsets, spf, coeffs, amp0, include_amp):
    for ki in range(kernels.size):
        n = kernels[ki]
        amp = n ** -0.75
        if include_amp:
            amp *= amp0
        base = offsets[ki]
        # factor count of primes p = 1 mod 4 dividing n (n admissible, squarefree)
        m = n
        ones = 0
        while m > 1:
            p = spf[m]
            if p % 4 == 1:
                ones += 1
            m //= p
        for q in range(1, inner_lens[ki] + 1):
            val = 1
            extra = ones
            rem = q
            while rem > 1:
                p = spf[rem]
                e = 0
                while rem % p == 0:
                    rem //= p
                    e += 1
                if p % 4 == 1:
                    if n % p == 0:
                        val *= 2 * e + 2
                        extra -= 1
                    else:
                        val *= 2 * e + 1
                # p = 2 and p = 3 mod 4 contribute factor 1 (even exponent in n q^2)
            rval = 4 * val * (1 << extra)
            coeffs[base + q - 1] = amp * rval * float(q) ** -1.5


def _squarefree_kernels(lo: int, hi: int) -> np.ndarray:
    """Squarefree integers in [lo, hi] as int64."""
    if hi < lo:
        return np.zeros(0, dtype=np.int64)
    flags = arith.squarefree_flags(hi)
    ks = np.nonzero(flags[: hi + 1])[0]
    return ks[ks >= lo].astype(np.int64)


def _circle_admissible(kernels: np.ndarray) -> np.ndarray:
    """Keep squarefree kernels with no prime factor = 3 mod 4; all inner
    coefficients of the others vanish identically."""
    keep = []
    for n in kernels:
        ok = True
        for p, _ in arith.factorize(int(n)):
            if p % 4 == 3:
                ok = False
                break
        if ok:
            keep.append(n)
    return np.asarray(keep, dtype=np.int64)


@lru_cache(maxsize=32)
def _zeta_tail_d2(Q: int, s: float) -> float:
    # sum_{q > Q} d(q)^2 / q^s via the identity sum d(q)^2 q^{-s} = zeta(s)^4/zeta(2s)
    with mp.workdps(30):
        full = mp.zeta(mp.mpf(s)) ** 4 / mp.zeta(2 * mp.mpf(s))
        dtab = arith.divisor_table(Q)
        qs = np.arange(1, Q + 1, dtype=np.float64)
        partial = float(np.sum(dtab[1 : Q + 1].astype(np.float64) ** 2 * qs ** -float(s)))
        return max(float(full - partial), 0.0)


def coefficient_table(
    family: str,
    kernel_limit: int,
    inner_limit: int | None = None,
    *,
    kernel_lo: int = 1,
    product_cap: int | None = None,
    include_amplitude: bool = True,
) -> CoefficientTable:
    """Build the flattened coefficient table for one truncated series.

    product_cap X restricts the inner index to n r^2 <= X (the zeta2 rule
    and the regrouping of an ungrouped sum over n <= X); otherwise the
    inner index runs to a uniform limit.
    """
    if family not in FAMILIES:
        raise UsageError(f"unknown family {family!r}")
    amp0, a0_dd, beta0 = _FAMILY[family]
    N = int(kernel_limit)
    if N < kernel_lo or N == 0:
        kernels = np.zeros(0, dtype=np.int64)
    else:
        kernels = _squarefree_kernels(kernel_lo, N)
    if family == "circle" and kernels.size:
        kernels = _circle_admissible(kernels)

    if family == "zeta2" and product_cap is None:
        product_cap = N**4

    if inner_limit is None:
        L = DEFAULT_CIRCLE_INNER if family == "circle" else N
    else:
        L = int(inner_limit)

    if kernels.size:
        if product_cap is not None:
            inner_lens = np.array(
                [math.isqrt(product_cap // int(n)) for n in kernels], dtype=np.int64
            )
            if inner_limit is not None:
                inner_lens = np.minimum(inner_lens, L)
            kernels = kernels[inner_lens >= 1]
            inner_lens = inner_lens[inner_lens >= 1]
        else:
            inner_lens = np.full(kernels.size, L, dtype=np.int64)
    else:
        inner_lens = np.zeros(0, dtype=np.int64)

    total = int(inner_lens.sum())
    if total > 200_000_000:
        raise ResourceBudgetError(f"coefficient table would hold {total} terms")
    offsets = np.zeros(kernels.size + 1, dtype=np.int64)
    np.cumsum(inner_lens, out=offsets[1:])
    coeffs = np.zeros(total, dtype=np.float64)

    if kernels.size:
        spf_needed = int(max(kernels.max(), inner_lens.max()))
        spf = arith.spf_table(max(spf_needed, 3))
        if family == "circle":
            _fill_circle_coeffs(kernels, inner_lens, offsets, spf, coeffs, amp0, include_amplitude)
        else:
            _fill_divisor_coeffs(
                kernels, inner_lens, offsets, spf, coeffs, amp0, include_amplitude,
                family == "zeta2",
            )

    sqrt_hi = np.zeros(kernels.size, dtype=np.float64)
    sqrt_lo = np.zeros(kernels.size, dtype=np.float64)
    for i, n in enumerate(kernels):
        h, l = dd_sqrt(float(n), 0.0)
        sqrt_hi[i] = h
        sqrt_lo[i] = l

    tail_l1 = 0.0
    tail_var = 0.0
    if family == "circle" and kernels.size:
        # r(n q^2) <= r(n) d(q)^2 whenever r(n) > 0, hence the dropped q-mass
        # obeys: l1 <= sum_n |amp| n^{-3/4} r(n) * sum_{q>L} d(q)^2 q^{-3/2},
        # and with d(q)^2 <= 4q also
        # variance <= (1/2) sum_n amp^2 n^{-3/2} r(n)^2 * 4 * sum_{q>L} d(q)^2 q^{-2}
        rn = np.array([arith.two_squares_count(int(n)) for n in kernels], dtype=np.float64)
        scale = abs(amp0) if include_amplitude else 1.0
        kf = kernels.astype(np.float64)
        qtab = min(L, 10**6)
        tail_l1 = float(scale * np.sum(kf**-0.75 * rn) * _zeta_tail_d2(qtab, 1.5))
        tail_var = float(
            0.5 * scale**2 * np.sum(kf**-1.5 * rn**2) * 4.0 * _zeta_tail_d2(qtab, 2.0)
        )

    return CoefficientTable(
        family=family,
        kernel_limit=N,
        inner_limit=L,
        include_amplitude=include_amplitude,
        kernels=kernels,
        offsets=offsets,
        coeffs=coeffs,
        sqrt_hi=sqrt_hi,
        sqrt_lo=sqrt_lo,
        amplitude=amp0,
        alpha0_dd=a0_dd,
        beta0=beta0,
        inner_tail_l1_bound=tail_l1,
        inner_tail_variance_bound=tail_var,
    )


@lru_cache(maxsize=8)
def _table_for_spec(family: str, kernel_limit: int, inner_limit) -> CoefficientTable:
    return coefficient_table(family, kernel_limit, inner_limit)


def table_for(spec: SeriesSpec) -> CoefficientTable:
    return _table_for_spec(spec.family, spec.kernel_limit, spec.inner_limit)


# ------------------------------------------------------------- evaluation

@dataclass(frozen=True)
class PhaseValue:
    """A phase reduced mod 1 with a propagated absolute error bound."""

    value_mod_1: float
    absolute_error_bound: float


def phase(n: int, r: int, t, alpha0=2.0) -> PhaseValue:
    """alpha0 * r * sqrt(n t) mod 1 with a certified error bound.

    alpha0 may be a float (taken exact) or a (hi, lo) double-double pair.
    The bound accounts for the dd square roots, the two dd products, and
    the final collapse to a single double.
    """
    if n < 1 or r < 1:
        raise UsageError("phase requires n, r >= 1")
    if t <= 0:
        raise UsageError("phase requires t > 0")
    if isinstance(alpha0, tuple):
        a_hi, a_lo = alpha0
    else:
        a_hi, a_lo = float(alpha0), 0.0
    nh, nl = dd_sqrt(float(n), 0.0)
    th, tl = dd_sqrt(float(t), 0.0)
    ph, pl = dd_mul(nh, nl, th, tl)
    ph, pl = dd_mul(ph, pl, a_hi, a_lo)
    ph, pl = dd_mul(ph, pl, float(r), 0.0)
    w = abs(ph)
    fh, fl = dd_frac(ph, pl)
    value = fh + fl
    if value >= 1.0:
        value -= 1.0
    # dd pipeline: ~6 operations at 2^-104 relative each, plus the final
    # collapse of (fh, fl) to one double
    bound = w * 6.0 * 2.0**-104 + 2.0**-53
    if bound >= 1e-6:
        raise PrecisionError(
            f"phase error bound {bound:.3e} exceeds 1e-6 at (n={n}, r={r}, t={t})"
        )
    return PhaseValue(value, bound)


def evaluate(spec: SeriesSpec, t) -> float:
    """Certified scalar evaluation of the truncated series at t > 0."""
    if t <= 0:
        raise UsageError("evaluate requires t > 0")
    if spec.kernel_limit == 0:
        return 0.0
    table = table_for(spec)
    out = np.empty(1, dtype=np.float64)
    a_hi, a_lo = table.alpha0_dd
    series_scan(
        np.array([float(t)], dtype=np.float64),
        table.sqrt_hi, table.sqrt_lo, a_hi, a_lo,
        table.offsets, table.coeffs,
        math.cos(table.beta0), math.sin(table.beta0),
        out,
    )
    # certify: per-kernel phase error grows linearly in the inner index
    # through the recurrence; total error <= l1 mass * rmax * 2pi * dphase.
    # The circle family's dropped q-tail is a declared truncation property
    # recorded on the table, not a precision failure.
    if table.kernels.size:
        wmax = float(spec.alpha0) * math.sqrt(float(table.kernels.max()) * float(t))
        dphase = wmax * 6.0 * 2.0**-104 + 2.0**-53
        rmax = int(np.max(np.diff(table.offsets))) if table.offsets.size > 1 else 1
        err = table.l1_mass() * rmax * 2.0 * math.pi * dphase
        if err > 1e-6:
            raise PrecisionError(
                f"series error bound {err:.3e} exceeds 1e-6 at t={t} "
                f"(kernel {int(table.kernels.max())}, inner {rmax})"
            )
    return float(out[0])


def evaluate_grid(spec: SeriesSpec, ts: np.ndarray) -> np.ndarray:
    """Bulk evaluation over a t-grid (same phase pipeline, no per-point
    certification; the scalar `evaluate` is the certified reference)."""
    ts = np.ascontiguousarray(ts, dtype=np.float64)
    if ts.size and ts.min() <= 0:
        raise UsageError("evaluate_grid requires t > 0")
    out = np.empty(ts.size, dtype=np.float64)
    if spec.kernel_limit == 0 or ts.size == 0:
        out[:] = 0.0
        return out
    table = table_for(spec)
    a_hi, a_lo = table.alpha0_dd
    series_scan(
        ts, table.sqrt_hi, table.sqrt_lo, a_hi, a_lo,
        table.offsets, table.coeffs,
        math.cos(table.beta0), math.sin(table.beta0), out,
    )
    return out


def evaluate_table_grid(table: CoefficientTable, ts: np.ndarray) -> np.ndarray:
    """evaluate_grid for a prebuilt (possibly custom) coefficient table."""
    ts = np.ascontiguousarray(ts, dtype=np.float64)
    out = np.empty(ts.size, dtype=np.float64)
    if table.term_count == 0 or ts.size == 0:
        out[:] = 0.0
        return out
    a_hi, a_lo = table.alpha0_dd
    series_scan(
        ts, table.sqrt_hi, table.sqrt_lo, a_hi, a_lo,
        table.offsets, table.coeffs,
        math.cos(table.beta0), math.sin(table.beta0), out,
    )
    return out


def ungrouped_sum(M: int, t) -> float:
    """The ungrouped divisor sum over n <= M:
    (1/(pi sqrt2)) sum d(n) n^{-3/4} cos(4 pi sqrt(n t) - pi/4)."""
    if M < 1:
        raise UsageError("ungrouped_sum requires M >= 1")
    if t <= 0:
        raise UsageError("ungrouped_sum requires t > 0")
    dtab = arith.divisor_table(M).astype(np.float64)
    out = np.empty(1, dtype=np.float64)
    ungrouped_scan(np.array([float(t)], dtype=np.float64), dtab, out)
    return float(out[0])


def ungrouped_sum_grid(M: int, ts: np.ndarray) -> np.ndarray:
    if M < 1:
        raise UsageError("ungrouped_sum requires M >= 1")
    ts = np.ascontiguousarray(ts, dtype=np.float64)
    dtab = arith.divisor_table(M).astype(np.float64)
    out = np.empty(ts.size, dtype=np.float64)
    ungrouped_scan(ts, dtab, out)
    return out


def oscillatory_integral(eta: float, T: float) -> complex:
    """Closed form of integral_T^{2T} e(eta sqrt t) dt via u = sqrt t:
    antiderivative 2 e^{cu} (u/c - 1/c^2) with c = 2 pi i eta.
    Satisfies |result| <= 4 sqrt(T) / |eta|."""
    if eta == 0:
        raise UsageError("oscillatory_integral requires eta != 0")
    if T < 1:
        raise UsageError("oscillatory_integral requires T >= 1")
    c = 2j * math.pi * eta

    def anti(u: float) -> complex:
        return 2.0 * cmath.exp(c * u) * (u / c - 1.0 / (c * c))

    return anti(math.sqrt(2.0 * T)) - anti(math.sqrt(T))
