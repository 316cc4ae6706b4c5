"""Deterministic-side statistics over t in [T, 2T].

Grids, empirical CDFs/moments of the truncated series (and of the exact
remainders at small scale), the clipped empirical Laplace transform, exact
two-sample KS distance, a Berry-Esseen style smoothing bound, and extreme
value scans of the exact error terms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import arith, model, series
from .constants import EULER_GAMMA, TWO_PI
from .errors import DegenerateInputError, UsageError
from .rng import STREAM_GRID, uniform_array

STRATEGIES = ("jittered-stratified", "uniform-random")

_SCAN_SEGMENT = 1 << 20


# ------------------------------------------------------------------- grids


@dataclass(frozen=True)
class TGrid:
    T: float
    count: int
    strategy: str
    seed: int
    points: np.ndarray

    def __post_init__(self):
        if self.points.size != self.count:
            raise UsageError("grid point count mismatch")


def t_grid(T: float, count: int, strategy: str = "jittered-stratified",
           seed: int = 0) -> TGrid:
    """Discretize the uniform measure on [T, 2T].  The stratified strategy
    places one uniform point in each cell [T + jT/count, T + (j+1)T/count)."""
    if T < 2:
        raise UsageError("need T >= 2")
    if count < 1:
        raise UsageError("need count >= 1")
    if strategy not in STRATEGIES:
        raise UsageError(f"unknown grid strategy {strategy!r}")
    seed = int(seed)
    u = uniform_array(seed, count, j=0, stream=STREAM_GRID)
    if strategy == "jittered-stratified":
        pts = T + (np.arange(count, dtype=np.float64) + u) * (T / count)
    else:
        pts = T * (1.0 + u)
    return TGrid(T=float(T), count=int(count), strategy=strategy, seed=seed,
                 points=pts)


# ------------------------------------------------------------- ECDF and KS


@dataclass(frozen=True)
class ECDF:
    values: np.ndarray   # sorted ascending
    count: int

    def __call__(self, u) -> np.ndarray:
        return np.searchsorted(self.values, u, side="right") / self.count


def empirical_cdf(values: np.ndarray) -> ECDF:
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise UsageError("empirical_cdf needs a nonempty sample")
    return ECDF(values=np.sort(values), count=int(values.size))


def ks_distance(a: ECDF, b: ECDF) -> float:
    """Exact two-sample Kolmogorov-Smirnov statistic.  The sup over u of
    |F_a - F_b| is attained at a jump point; compare the step counts there
    with integer cross-multiplication, so no rounding enters the sup."""
    na, nb = a.count, b.count
    if na * nb > 1 << 62:
        raise UsageError("sample sizes too large for exact integer comparison")
    grid = np.concatenate([a.values, b.values])
    grid.sort(kind="mergesort")
    ia = np.searchsorted(a.values, grid, side="right").astype(np.int64)
    ib = np.searchsorted(b.values, grid, side="right").astype(np.int64)
    num = int(np.abs(ia * nb - ib * na).max())
    return num / (na * nb)


def empirical_moment(values: np.ndarray, k: int) -> model.MomentValue:
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise UsageError("empirical_moment needs a nonempty sample")
    if k < 0:
        raise UsageError("moment order must be >= 0")
    powers = values**k
    mean = float(powers.mean())
    se = float(powers.std() / math.sqrt(powers.size))
    return model.MomentValue(order=k, value=mean, method="monte-carlo",
                             error_bound=se)


# --------------------------------------------------------- moment matching


def raw_weight_table(M: int, weights: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Coefficient table for the plain sum over m <= M of
    a_m cos(2 pi alpha0 sqrt(m t) + beta0), regrouped as m = n r^2:
    kernel n squarefree, inner coefficient a_{n r^2} (no decay weights)."""
    if M < 1:
        raise UsageError("need M >= 1")
    if weights not in ("unit", "alternating"):
        raise UsageError("weights must be 'unit' or 'alternating'")
    flags = arith.squarefree_flags(M)
    kernels = np.flatnonzero(flags[1:]) + 1
    inner = np.array([math.isqrt(M // int(n)) for n in kernels], dtype=np.int64)
    offsets = np.zeros(kernels.size + 1, dtype=np.int64)
    np.cumsum(inner, out=offsets[1:])
    coeffs = np.zeros(int(inner.sum()), dtype=np.float64)
    for i, n in enumerate(kernels):
        for r in range(1, int(inner[i]) + 1):
            m = int(n) * r * r
            coeffs[offsets[i] + r - 1] = -1.0 if (weights == "alternating" and m % 2) else 1.0
    return kernels.astype(np.int64), offsets, coeffs


@dataclass(frozen=True)
class MomentMatchReport:
    family: str
    T: float
    M: int
    h: int
    weights: str
    grid_count: int
    seed: int
    strategy: str
    empirical: float
    exact: float
    difference: float
    admissible: bool
    admissible_m_cap: float


def admissible_m_cap(T: float, h: int) -> float:
    """The proposition-shaped admissibility threshold T^{1/(2^h+4h)} / h^2;
    reported, never enforced (it is a sufficient condition only)."""
    return T ** (1.0 / (2**h + 4 * h)) / h**2


def moment_match_report(family: str, T: float, M: int, h: int, *,
                        weights: str = "unit", grid_count: int = 10**6,
                        seed: int = 0,
                        strategy: str = "jittered-stratified") -> MomentMatchReport:
    """Empirical h-th moment of sum_{m<=M} a_m cos(2 pi alpha0 sqrt(m t) + beta0)
    over a t-grid versus the exact model moment at the same (regrouped)
    coefficients."""
    if h < 0:
        raise UsageError("need h >= 0")
    sp = series.SeriesSpec(family, max(M, 1))
    alpha0, beta0 = sp.alpha0, sp.beta0
    grid = t_grid(T, grid_count, strategy, seed)
    s = np.zeros(grid_count, dtype=np.float64)
    for m in range(1, M + 1):
        a_m = -1.0 if (weights == "alternating" and m % 2) else 1.0
        s += a_m * np.cos(TWO_PI * alpha0 * np.sqrt(m * grid.points) + beta0)
    empirical = float(np.mean(s**h))
    _, offsets, coeffs = raw_weight_table(M, weights)
    exact = model.exact_moment_terms(offsets, coeffs, beta0, h)
    cap = admissible_m_cap(T, h) if h >= 1 else math.inf
    return MomentMatchReport(
        family=family, T=float(T), M=M, h=h, weights=weights,
        grid_count=grid_count, seed=int(seed), strategy=strategy,
        empirical=empirical, exact=exact, difference=empirical - exact,
        admissible=bool(M <= cap), admissible_m_cap=float(cap),
    )


# ------------------------------------------------- clipped Laplace and BE


@dataclass(frozen=True)
class ClipPolicy:
    K: int        # floor(log log T / 8), the proof's scale parameter
    K_eff: int    # max(K, 2); K <= 1 leaves log K degenerate at desk scale
    V: float      # C3 * K_eff^{1/4} (log K_eff)^{5/4}
    C3: float


def clip_policy(T: float, C3: float = 10.0) -> ClipPolicy:
    if T <= math.e:
        raise UsageError("need T > e for log log T")
    K = int(math.floor(math.log(math.log(T)) / 8.0))
    K_eff = max(K, 2)
    V = C3 * K_eff**0.25 * math.log(K_eff) ** 1.25
    return ClipPolicy(K=K, K_eff=K_eff, V=V, C3=C3)


@dataclass(frozen=True)
class ClippedLaplace:
    value: float             # (1/total) sum_{|v|<=V} exp(lam v)
    excluded_fraction: float
    kept: int
    total: int
    lam: float
    clip: float


def clipped_laplace(values: np.ndarray, lam: float, clip: float) -> ClippedLaplace:
    """Restricted empirical Laplace mean over the samples with |value| <= clip,
    normalized by the total count (the measure of the clipped set is part of
    the estimate, so at lam=0 the value is the kept fraction)."""
    if clip <= 0:
        raise UsageError("clip threshold must be positive")
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise UsageError("clipped_laplace needs a nonempty sample")
    mask = np.abs(values) <= clip
    kept = int(mask.sum())
    total = int(values.size)
    if kept == 0:
        raise DegenerateInputError("all samples exceed the clip threshold")
    value = float(np.exp(lam * values[mask]).sum() / total)
    return ClippedLaplace(value=value, excluded_fraction=1.0 - kept / total,
                          kept=kept, total=total, lam=float(lam),
                          clip=float(clip))


def char_fn_empirical(values: np.ndarray, alpha: float) -> complex:
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise UsageError("char_fn_empirical needs a nonempty sample")
    return complex(np.exp(1j * alpha * values).mean())


def _eval_phi(phi, alphas: np.ndarray) -> np.ndarray:
    try:
        out = np.asarray(phi(alphas), dtype=np.complex128)
        if out.shape == alphas.shape:
            return out
    except (TypeError, ValueError):
        pass
    return np.array([phi(float(a)) for a in alphas], dtype=np.complex128)


def berry_esseen_bound(phi_emp, phi_model, R: float, grid: int, *,
                       mean_abs_emp: float, mean_abs_model: float,
                       small_alpha: float | None = None) -> float:
    """1/R + int_{-R}^{R} |phi_emp - phi_model| / |alpha| d alpha, with the
    |alpha| <= small_alpha piece bounded by |phi(alpha) - 1| <= |alpha| E|X|
    (so the integrand never blows up at the origin).  Both transforms are
    conjugate-symmetric, so the integral is twice the [0, R] half."""
    if R <= 0:
        raise UsageError("need R > 0")
    if grid < 2:
        raise UsageError("need at least 2 quadrature points")
    a_small = R / grid if small_alpha is None else float(small_alpha)
    if not 0 < a_small < R:
        raise UsageError("small_alpha must lie in (0, R)")
    alphas = np.linspace(a_small, R, grid)
    diff = np.abs(_eval_phi(phi_emp, alphas) - _eval_phi(phi_model, alphas))
    integral = float(np.trapezoid(diff / alphas, alphas))
    small = a_small * (mean_abs_emp + mean_abs_model)
    return 1.0 / R + 2.0 * (integral + small)


# ------------------------------------------------------------ exact scans


def exact_normalized_grid(family: str, ts: np.ndarray) -> np.ndarray:
    """t^{-1/4} times the exact remainder at each grid point."""
    ts = np.asarray(ts, dtype=np.float64)
    if family == "divisor":
        raw = arith.delta_bulk(ts)
    elif family == "circle":
        raw = arith.p_error_bulk(ts)
    else:
        raise UsageError("exact scans cover the divisor and circle families")
    return raw * ts**-0.25


@dataclass(frozen=True)
class ExtremeScan:
    family: str
    X: float
    grid_density: int
    max_value: float
    argmax: float
    reference_value: float


def _reference_curve(family: str, x: float) -> float:
    loglog = math.log(math.log(x))
    if family == "divisor":
        expo = 0.75 * (2 ** (4 / 3) - 1.0)
    else:
        expo = 0.75 * (2 ** (1 / 3) - 1.0)
    return (x * math.log(x)) ** 0.25 * loglog**expo


def extreme_scan(X: float, grid_density: int = 10**4,
                 family: str = "divisor") -> ExtremeScan:
    """Max of the exact error term over [X, 2X].  Between integers the term
    strictly decreases (the counting sum is flat, the main term grows), so
    the sup sits at an integer jump; every integer in range is evaluated
    exactly, plus a uniform grid of grid_density points and both endpoints.
    """
    if X < 10:
        raise UsageError("need X >= 10")
    if family not in ("divisor", "circle"):
        raise UsageError("extreme_scan covers the divisor and circle families")
    lo = math.ceil(X)
    hi = math.floor(2 * X)
    grid = np.linspace(X, 2 * X, max(int(grid_density), 2))

    best = -math.inf
    best_t = X

    def consider(ts: np.ndarray, vals: np.ndarray):
        nonlocal best, best_t
        i = int(np.argmax(vals))
        if vals[i] > best:
            best = float(vals[i])
            best_t = float(ts[i])

    for a in range(lo, hi + 1, _SCAN_SEGMENT):
        b = min(a + _SCAN_SEGMENT - 1, hi)
        if family == "divisor":
            vals = arith.divisor_values_range(a, b + 1).astype(np.int64)
            base = arith.summatory_divisor(a - 1)
        else:
            vals = arith.two_squares_values_range(a, b + 1).astype(np.int64)
            base = arith.lattice_count(a - 1) - 1
        cum = base + np.cumsum(vals)
        ks = np.arange(a, b + 1, dtype=np.float64)
        if family == "divisor":
            main = ks * (np.log(ks) + 2.0 * EULER_GAMMA - 1.0)
        else:
            main = math.pi * ks
        consider(ks, cum - main)
        # grid points whose floor falls in this segment
        sel = grid[(grid >= a) & (grid < b + 1)]
        if sel.size:
            fl = np.floor(sel).astype(np.int64)
            counts = cum[fl - a].astype(np.float64)
            if family == "divisor":
                mains = sel * (np.log(sel) + 2.0 * EULER_GAMMA - 1.0)
            else:
                mains = math.pi * sel
            consider(sel, counts - mains)

    # endpoints (X itself may precede the first integer in range)
    for t in (float(X), float(2 * X)):
        v = arith.error_term(family, t).remainder
        if v > best:
            best, best_t = float(v), t
    return ExtremeScan(family=family, X=float(X), grid_density=int(grid_density),
                       max_value=best, argmax=best_t,
                       reference_value=_reference_curve(family, best_t))
