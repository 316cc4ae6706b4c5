"""Random models of the remainder-term series.

The deterministic phases r sqrt(n t) are replaced by r * X_n with one
i.i.d. uniform X_n per squarefree kernel n.  Everything here is a finite
truncation; kernels are independent, so expectations factor and moments
reduce to per-kernel diagonal bookkeeping.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import series
from ._kernels import count_exceed, kernel_profile, model_scan
from .arith import divisor_count, two_squares_count
from .errors import (
    OutOfRangeError,
    PrecisionError,
    ResourceBudgetError,
    UsageError,
)
from .rng import STREAM_MODEL, STREAM_TAIL

# |lambda| guard for the Laplace transform; the transform grows like
# exp(c lambda^{4/3+o(1)}) so factors stay finite well past this, but the
# cap keeps quadrature budgets predictable.
LAPLACE_LAMBDA_CAP = 512.0

# work guard for exact_moment: roughly k^2 * (total polynomial length)
EXACT_MOMENT_BUDGET = 2 * 10**9

_QUAD_START = 64
_QUAD_MAX = 1 << 22
_QUAD_RTOL = 1e-12


@dataclass(frozen=True)
class ModelSpec:
    """A truncated random series: family + truncation + coefficient options.

    kernel_lo/include_amplitude exist for the windowed amplitude-free sums
    used by the explicit moment bounds; the plain model is kernel_lo=1 with
    amplitude included.
    """

    family: str
    kernel_limit: int
    inner_limit: int | None = None
    kernel_lo: int = 1
    include_amplitude: bool = True

    def __post_init__(self):
        if self.family not in series.FAMILIES:
            raise UsageError(f"unknown family {self.family!r}")
        if self.kernel_limit < 0:
            raise UsageError("kernel_limit must be >= 0")
        if self.kernel_lo < 1:
            raise UsageError("kernel_lo must be >= 1")
        if self.inner_limit is not None and self.inner_limit < 1:
            raise UsageError("inner_limit must be >= 1")

    def table(self) -> series.CoefficientTable:
        return _model_table(
            self.family, self.kernel_limit, self.inner_limit,
            self.kernel_lo, self.include_amplitude,
        )


@lru_cache(maxsize=16)
def _model_table(family, kernel_limit, inner_limit, kernel_lo, include_amplitude):
    return series.coefficient_table(
        family, kernel_limit, inner_limit,
        kernel_lo=kernel_lo, include_amplitude=include_amplitude,
    )


def matched_model(spec: series.SeriesSpec) -> ModelSpec:
    """The model at the same truncation as a deterministic series spec."""
    return ModelSpec(spec.family, spec.kernel_limit, spec.inner_limit)


@dataclass(frozen=True)
class SampleBatch:
    model: ModelSpec
    seed: int
    start_index: int
    values: np.ndarray

    @property
    def count(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class MomentValue:
    order: int
    value: float
    method: str           # "exact" | "monte-carlo"
    error_bound: float    # 0 for exact, CI half-width for MC


def _check_seed(seed) -> int:
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise UsageError("seed must fit in 64 bits")
    return seed


def _sample_values(model: ModelSpec, count: int, seed: int, start_index: int,
                   stream: int) -> np.ndarray:
    tab = model.table()
    out = np.empty(count, dtype=np.float64)
    cos_b = math.cos(tab.beta0)
    sin_b = math.sin(tab.beta0)
    # seed as uint64 (full 64-bit range); start_index stays int64 so the
    # idx arithmetic inside the kernel keeps integer typing
    model_scan(count, np.uint64(seed), start_index, stream,
               tab.offsets, tab.coeffs, cos_b, sin_b, out)
    return out


def sample(model: ModelSpec, count: int, seed: int, start_index: int = 0) -> SampleBatch:
    """Draw count independent model values; sample i is a pure function of
    (model, seed, start_index + i)."""
    if count < 1:
        raise UsageError("count must be >= 1")
    seed = _check_seed(seed)
    values = _sample_values(model, count, seed, start_index, STREAM_MODEL)
    return SampleBatch(model=model, seed=seed, start_index=start_index, values=values)


# ----------------------------------------------------------- exact moments


def exact_moment_terms(offsets: np.ndarray, coeffs: np.ndarray, beta0: float,
                       k: int) -> float:
    """E[(sum_kernels sum_r c_r cos(2 pi r X + beta0))^k] exactly.

    Each cosine splits into (c/2) e^{i beta0} z^r + (c/2) e^{-i beta0} z^{-r}
    with z = e^{2 pi i X}; only assignments whose integer frequency sum
    vanishes per kernel survive the expectation.  Per kernel the j-th power
    is an exact polynomial convolution; kernels combine by the binomial
    rollup for independent mean-contributing factors.
    """
    if k == 0:
        return 1.0
    if k == 1:
        return 0.0  # every term has r >= 1, so E[cos(2 pi r X + b)] = 0
    nk = offsets.size - 1
    if k == 2:
        # diagonal closed form, bitwise identical to the variance sum
        return 0.5 * float(np.square(coeffs).sum())

    work = 0
    for i in range(nk):
        rmax = int(offsets[i + 1] - offsets[i])
        work += k * k * (2 * rmax + 1)
    if work > EXACT_MOMENT_BUDGET:
        raise ResourceBudgetError(
            f"exact moment needs ~{work} convolution ops; use Monte Carlo "
            "(sample/tail_mc) instead"
        )

    eb = complex(math.cos(beta0), math.sin(beta0))
    # moments[j] = E[(partial sum over processed kernels)^j]
    moments = np.zeros(k + 1, dtype=np.float64)
    moments[0] = 1.0
    binom = np.zeros((k + 1, k + 1), dtype=np.float64)
    for j in range(k + 1):
        binom[j, : j + 1] = [math.comb(j, i) for i in range(j + 1)]

    for i in range(nk):
        lo, hi = int(offsets[i]), int(offsets[i + 1])
        rmax = hi - lo
        if rmax == 0:
            continue
        c = coeffs[lo:hi]
        if not np.any(c):
            continue
        poly = np.zeros(2 * rmax + 1, dtype=np.complex128)
        for r in range(1, rmax + 1):
            half = 0.5 * c[r - 1]
            poly[rmax + r] += half * eb
            poly[rmax - r] += half * eb.conjugate()
        # mu[j] = central coefficient of poly^j = E[(kernel sum)^j]
        mu = np.zeros(k + 1, dtype=np.float64)
        mu[0] = 1.0
        pw = poly.copy()
        mu[1] = pw[rmax].real
        for j in range(2, k + 1):
            pw = np.convolve(pw, poly)
            mu[j] = pw[(pw.size - 1) // 2].real
        new = np.zeros(k + 1, dtype=np.float64)
        for j in range(k + 1):
            acc = 0.0
            for i2 in range(j + 1):
                if mu[i2] != 0.0:
                    acc += binom[j, i2] * mu[i2] * moments[j - i2]
            new[j] = acc
        moments = new
    return float(moments[k])


def exact_moment(model: ModelSpec, k: int) -> MomentValue:
    if k < 0:
        raise UsageError("moment order must be >= 0")
    tab = model.table()
    value = exact_moment_terms(tab.offsets, tab.coeffs, tab.beta0, k)
    return MomentValue(order=k, value=value, method="exact", error_bound=0.0)


def variance_closed_form(family: str, kernel_limit: int,
                         inner_limit: int | None = None) -> MomentValue:
    """c0^2 (1/2) sum_{m squarefree <= N} m^{-3/2} sum_{r<=L} kappa(m r^2)^2 / r^3,
    the exact variance of the truncated model."""
    tab = ModelSpec(family, kernel_limit, inner_limit).table()
    return MomentValue(order=2, value=tab.variance(), method="exact", error_bound=0.0)


def moment_upper_bound(family: str, N: int, M: int, L: int, k: int) -> float:
    """k! (sum_{N<=n<M} n^{-3/2} sum_{q<=L} kappa(n q^2)^2 / q^3)^k, the fully
    explicit diagonal bound on E|amplitude-free series|^{2k}.  The outer sum
    runs over all integers in [N, M) (the squarefree restriction on the
    series only makes the true moment smaller)."""
    if family not in series.FAMILIES:
        raise UsageError(f"unknown family {family!r}")
    if not 1 <= N < M:
        raise UsageError("need 1 <= N < M")
    if L < 1 or k < 1:
        raise UsageError("need L >= 1 and k >= 1")
    if (M - N) * L > 5 * 10**6:
        raise ResourceBudgetError("moment bound window too large")
    kappa = divisor_count if family in ("divisor", "zeta2") else two_squares_count
    base = 0.0
    for n in range(N, M):
        inner = 0.0
        for q in range(1, L + 1):
            inner += kappa(n * q * q) ** 2 / q**3
        base += inner / n**1.5
    return math.factorial(k) * base**k


# -------------------------------------------------------------- transforms


def _factor_log_laplace(tab: series.CoefficientTable, kernel: int, lam: float) -> float:
    """log of integral_0^1 exp(lam * A_k(x)) dx for one kernel, by trapezoid
    (= rectangle, periodic) quadrature on a doubling grid."""
    cos_b = math.cos(tab.beta0)
    sin_b = math.sin(tab.beta0)
    prev = None
    g = _QUAD_START
    while g <= _QUAD_MAX:
        xs = np.arange(g, dtype=np.float64) / g
        prof = np.empty(g, dtype=np.float64)
        kernel_profile(tab.offsets, tab.coeffs, kernel, 2.0 * np.pi * xs,
                       cos_b, sin_b, prof)
        shift = lam * float(prof.max()) if lam >= 0 else lam * float(prof.min())
        val = shift + math.log(float(np.mean(np.exp(lam * prof - shift))))
        if prev is not None and abs(val - prev) <= _QUAD_RTOL * max(1.0, abs(val)):
            return val
        prev = val
        g *= 2
    raise PrecisionError("Laplace factor quadrature did not converge")


def _factor_char(tab: series.CoefficientTable, kernel: int, alpha: float) -> complex:
    cos_b = math.cos(tab.beta0)
    sin_b = math.sin(tab.beta0)
    prev = None
    g = _QUAD_START
    while g <= _QUAD_MAX:
        xs = np.arange(g, dtype=np.float64) / g
        prof = np.empty(g, dtype=np.float64)
        kernel_profile(tab.offsets, tab.coeffs, kernel, 2.0 * np.pi * xs,
                       cos_b, sin_b, prof)
        val = complex(np.mean(np.exp(1j * alpha * prof)))
        if prev is not None and abs(val - prev) <= _QUAD_RTOL * max(1.0, abs(val)):
            return val
        prev = val
        g *= 2
    raise PrecisionError("characteristic-function quadrature did not converge")


def laplace_log(model: ModelSpec, lam: float, cap: float = LAPLACE_LAMBDA_CAP) -> float:
    """log E[exp(lam * model)]; the product over kernels accumulated in log
    space so large lam never overflows."""
    if not math.isfinite(lam):
        raise UsageError("lambda must be finite")
    if abs(lam) > cap:
        raise UsageError(f"|lambda| exceeds the configured cap {cap}")
    if lam == 0.0:
        return 0.0
    tab = model.table()
    total = 0.0
    for k in range(tab.kernels.size):
        total += _factor_log_laplace(tab, k, lam)
    return total


def laplace(model: ModelSpec, lam: float, cap: float = LAPLACE_LAMBDA_CAP) -> float:
    if lam == 0.0:
        return 1.0
    lv = laplace_log(model, lam, cap)
    if lv > 709.0:
        raise OutOfRangeError("Laplace transform exceeds float range; use laplace_log")
    return math.exp(lv)


def char_fn(model: ModelSpec, alpha: float) -> complex:
    """E[exp(i alpha * model)]; conjugate-symmetric in alpha by construction."""
    if not math.isfinite(alpha):
        raise UsageError("alpha must be finite")
    if alpha == 0.0:
        return complex(1.0, 0.0)
    if alpha < 0.0:
        return char_fn(model, -alpha).conjugate()
    tab = model.table()
    total = complex(1.0, 0.0)
    for k in range(tab.kernels.size):
        total *= _factor_char(tab, k, alpha)
    return total


def neglected_variance_bound(model: ModelSpec) -> float:
    """Second-order size of the kernels dropped beyond kernel_limit:
    c0^2 (1/2) sum_{n > N} d(n)^2 n^{-3/2}, computed exactly from the zeta
    identity sum d(n)^2 n^{-s} = zeta(s)^4 / zeta(2s); for the circle family
    r(n)^2 <= 16 d(n)^2 gives a (crude) upper bound."""
    import mpmath as mp

    tab = model.table()
    N = model.kernel_limit
    full = mp.zeta(1.5) ** 4 / mp.zeta(3.0)
    partial = mp.mpf(0)
    for n in range(1, N + 1):
        partial += mp.mpf(divisor_count(n) ** 2) / mp.mpf(n) ** mp.mpf(1.5)
    tail = float(full - partial)
    scale = tab.amplitude**2 if model.include_amplitude else 1.0
    if model.family == "circle":
        scale *= 16.0
    return 0.5 * scale * tail


# ----------------------------------------------------------------- MC tails


@dataclass(frozen=True)
class TailEstimate:
    probability: float
    half_width: float      # 4 sigma binomial half-width, floored at 4/count
    count: int
    exceed_count: int
    threshold: float
    seed: int


def tail_mc(model: ModelSpec, V: float, count: int, seed: int,
            start_index: int = 0) -> TailEstimate:
    """Monte Carlo estimate of P(model > V) with a binomial CI half-width."""
    if count < 10**3:
        raise UsageError("tail_mc needs count >= 1000")
    seed = _check_seed(seed)
    values = _sample_values(model, count, seed, start_index, STREAM_TAIL)
    exceed = int(count_exceed(values, float(V)))
    p = exceed / count
    sigma = math.sqrt(p * (1.0 - p) / count)
    hw = 4.0 * max(sigma, 1.0 / count)
    return TailEstimate(probability=p, half_width=hw, count=count,
                        exceed_count=exceed, threshold=float(V), seed=seed)


def tail_values(model: ModelSpec, count: int, seed: int,
                start_index: int = 0) -> np.ndarray:
    """The sample batch tail_mc counts over, exposed so a whole V-grid can be
    resolved from one draw (bit-identical to per-V tail_mc at the same seed)."""
    if count < 1:
        raise UsageError("count must be >= 1")
    seed = _check_seed(seed)
    return _sample_values(model, count, seed, start_index, STREAM_TAIL)
