"""Large-deviation machinery built on Laplace-transform curves.

Chernov upper bounds, the lambda-equation solver and Paley-Zygmund lower
bounds, reference tail shapes, exponent fitting, and the assembled tail
report (bounds + Monte Carlo sandwich on a V-grid).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from . import model as model_mod
from .errors import DegenerateInputError, OutOfRangeError, UsageError

LAMBDA_GRID_START = 2.0**-6
LAMBDA_GRID_RATIO = 2.0 ** (1.0 / 8.0)
DEFAULT_LAMBDA_CAP = 32.0

_PROVENANCES = ("model-analytic", "empirical-clipped")
_CONVEXITY_TOL = 1e-9
_BISECT_RTOL = 1e-10


def default_lambda_grid(cap: float = DEFAULT_LAMBDA_CAP) -> np.ndarray:
    """Geometric grid from 2^-6 up to cap with ratio 2^{1/8}; log-convex
    curves are resolved efficiently by geometric spacing."""
    if cap <= LAMBDA_GRID_START:
        raise UsageError("lambda cap must exceed the grid start")
    n = int(math.floor(math.log(cap / LAMBDA_GRID_START) / math.log(LAMBDA_GRID_RATIO)))
    return LAMBDA_GRID_START * LAMBDA_GRID_RATIO ** np.arange(n + 1)


@dataclass(frozen=True)
class LaplaceCurve:
    """L(lambda) sampled on an increasing positive grid, kept in log space.

    Log-convexity (Hoelder) and the L(0+) -> 1 endpoint are validated on
    ingest; interpolation between grid points is a not-a-knot cubic spline
    on (lambda, log L), which reproduces Gaussian curves exactly.
    """

    lambdas: np.ndarray
    log_values: np.ndarray
    provenance: str
    _spline: CubicSpline = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        lam = np.asarray(self.lambdas, dtype=np.float64)
        lv = np.asarray(self.log_values, dtype=np.float64)
        if lam.size < 4:
            raise UsageError("Laplace curve needs at least 4 grid points")
        if lam.size != lv.size:
            raise UsageError("grid/value length mismatch")
        if not (np.diff(lam) > 0).all() or lam[0] <= 0:
            raise UsageError("lambda grid must be increasing and positive")
        if self.provenance not in _PROVENANCES:
            raise UsageError(f"unknown curve provenance {self.provenance!r}")
        if not np.isfinite(lv).all():
            raise UsageError("log L values must be finite")
        # log-convexity: divided differences of log L must be nondecreasing
        slopes = np.diff(lv) / np.diff(lam)
        if (np.diff(slopes) < -_CONVEXITY_TOL).any():
            raise UsageError("curve is not log-convex on its grid")
        # L extrapolates to 1 at 0+: log L at the smallest lambda is small
        # and nonnegative up to quadrature noise (Jensen: L >= 1 for a
        # centered variable; empirical curves may dip slightly below)
        if lv[0] < -0.05 or lv[0] > 0.5:
            raise UsageError("curve does not extrapolate to L(0+) = 1")
        object.__setattr__(self, "_spline", CubicSpline(lam, lv))

    @property
    def values(self) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(self.log_values)

    def log_interp(self, lam: float) -> float:
        if not self.lambdas[0] <= lam <= self.lambdas[-1]:
            raise OutOfRangeError(f"lambda {lam} outside the curve grid")
        return float(self._spline(lam))


def model_curve(model: model_mod.ModelSpec, cap: float = DEFAULT_LAMBDA_CAP,
                lambdas: np.ndarray | None = None) -> LaplaceCurve:
    if lambdas is None:
        lambdas = default_lambda_grid(cap)
    logs = np.array([model_mod.laplace_log(model, float(l)) for l in lambdas])
    return LaplaceCurve(lambdas=np.asarray(lambdas, dtype=np.float64),
                        log_values=logs, provenance="model-analytic")


def empirical_curve(values: np.ndarray, lambdas: np.ndarray,
                    clip: float) -> LaplaceCurve:
    """Curve from the clipped empirical Laplace means of a sample batch."""
    from .empirics import clipped_laplace

    logs = np.array([math.log(clipped_laplace(values, float(l), clip).value)
                     for l in lambdas])
    return LaplaceCurve(lambdas=np.asarray(lambdas, dtype=np.float64),
                        log_values=logs, provenance="empirical-clipped")


# ------------------------------------------------------------------ bounds


def chernov_upper(curve: LaplaceCurve, V: float) -> float:
    """min over the grid of e^{-lambda V} L(lambda), clamped to <= 1."""
    best = float(np.min(curve.log_values - curve.lambdas * V))
    return math.exp(min(best, 0.0))


def solve_lambda(curve: LaplaceCurve, V: float) -> float:
    """The lambda* with L(lambda*) = 2 e^{lambda* V}, by bisection on the
    log-difference over the spline curve; relative tolerance 1e-10."""
    lam = curve.lambdas

    def g(x: float) -> float:
        return curve.log_interp(x) - x * V - math.log(2.0)

    glast = g(float(lam[-1]))
    if glast <= 0.0:
        raise OutOfRangeError(
            "no crossing on the grid: L(lambda_max) <= 2 exp(lambda_max V)"
        )
    if g(float(lam[0])) >= 0.0:
        raise OutOfRangeError("crossing lies below the grid start")
    gv = curve.log_values - lam * V - math.log(2.0)
    idx = int(np.argmax(gv > 0.0))  # first grid point with g > 0
    lo, hi = float(lam[idx - 1]), float(lam[idx])
    while hi - lo > _BISECT_RTOL * hi:
        mid = 0.5 * (lo + hi)
        if g(mid) > 0.0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def pz_lower(curve: LaplaceCurve, V: float) -> float:
    """Paley-Zygmund lower bound (1/4) L(lambda*)^2 / L(2 lambda*) for
    P(X > V), at the lambda* solving the Chernov-dual equation."""
    lam_star = solve_lambda(curve, V)
    if 2.0 * lam_star > curve.lambdas[-1]:
        raise OutOfRangeError("2 lambda* beyond the curve grid")
    logpz = (math.log(0.25) + 2.0 * curve.log_interp(lam_star)
             - curve.log_interp(2.0 * lam_star))
    return math.exp(logpz)


def lau_reference(V: float, family: str, b: float = 1.0) -> float:
    """exp(-b V^4 (log V)^{-e}) with e = 3(2^{4/3}-1) for the divisor/zeta2
    shape and e = 3(2^{1/3}-1) for the circle shape; b is caller-supplied
    (the shape constants are not explicit)."""
    if V <= 1.0:
        raise UsageError("reference curve needs V > 1")
    if family in ("divisor", "zeta2"):
        e = 3.0 * (2.0 ** (4.0 / 3.0) - 1.0)
    elif family == "circle":
        e = 3.0 * (2.0 ** (1.0 / 3.0) - 1.0)
    else:
        raise UsageError(f"unknown family {family!r}")
    return math.exp(-b * V**4 * math.log(V) ** -e)


def fit_exponent(v_grid: np.ndarray, probabilities: np.ndarray) -> float:
    """Slope of log(-log p) against log V over the points with 0 < p < 1."""
    v = np.asarray(v_grid, dtype=np.float64)
    p = np.asarray(probabilities, dtype=np.float64)
    mask = (p > 0.0) & (p < 1.0) & (v > 0.0)
    if int(mask.sum()) < 2 or np.unique(v[mask]).size < 2:
        raise DegenerateInputError("need at least two usable (V, p) points")
    x = np.log(v[mask])
    y = np.log(-np.log(p[mask]))
    return float(np.polyfit(x, y, 1)[0])


# ------------------------------------------------------------- tail report


@dataclass(frozen=True)
class TailReport:
    family: str
    kernel_limit: int
    inner_limit: int
    count: int
    seed: int
    lambda_cap: float
    b: float
    v_grid: tuple
    chernov: tuple
    pz: tuple          # None where the crossing leaves the grid
    mc: tuple
    mc_ci: tuple       # 4 sigma binomial half-widths
    reference: tuple

    def rows(self):
        for i, v in enumerate(self.v_grid):
            yield (v, self.chernov[i], self.pz[i], self.mc[i],
                   self.mc_ci[i], self.reference[i])


def tail_report(model: model_mod.ModelSpec, v_grid, count: int, seed: int, *,
                lambda_cap: float = DEFAULT_LAMBDA_CAP, b: float = 1.0,
                curve: LaplaceCurve | None = None) -> TailReport:
    """Bounds + MC estimates on a V-grid from one sample batch; the MC column
    at each V is bit-identical to tail_mc at the same (count, seed)."""
    if curve is None:
        curve = model_curve(model, lambda_cap)
    values = model_mod.tail_values(model, count, seed)
    tab = model.table()
    ch, pz, mc, ci, ref = [], [], [], [], []
    for v in v_grid:
        v = float(v)
        ch.append(chernov_upper(curve, v))
        try:
            pz.append(pz_lower(curve, v))
        except OutOfRangeError:
            pz.append(None)
        exceed = int(np.count_nonzero(values > v))
        p = exceed / count
        sigma = math.sqrt(p * (1.0 - p) / count)
        mc.append(p)
        ci.append(4.0 * max(sigma, 1.0 / count))
        ref.append(lau_reference(v, model.family, b) if v > 1.0 else None)
    return TailReport(
        family=model.family, kernel_limit=model.kernel_limit,
        inner_limit=tab.inner_limit, count=int(count), seed=int(seed),
        lambda_cap=float(lambda_cap), b=float(b),
        v_grid=tuple(float(v) for v in v_grid),
        chernov=tuple(ch), pz=tuple(pz), mc=tuple(mc), mc_ci=tuple(ci),
        reference=tuple(ref),
    )
