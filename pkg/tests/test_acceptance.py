"""Acceptance criteria, one test per criterion.

Each test appends a one-line verdict (with the measured numbers) to
conftest.ACCEPTANCE_LINES; the conftest terminal hook echoes the block
after the run.  Tests assert the criterion, so an out-of-reach criterion
shows up as an ordinary failure with its measured distance.

Frozen oracle constants are marked inline; each was computed from an
independent construction (naive sieves, Euler-Maclaurin zeta, quadrature
phase models) before being frozen here.
"""

import math
import time

import numpy as np
import pytest
from scipy.special import j0

import conftest
from errorlab import arith, empirics, independence, model, series, tails


def _verdict(num: int, ok: bool, detail: str) -> None:
    line = f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    conftest.ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


# --------------------------------------------------------------- criterion 1


def test_criterion_01_exact_counting_oracles():
    X = 10**5
    t0 = time.time()
    d = np.zeros(X + 1, dtype=np.int64)
    for i in range(1, X + 1):
        d[i::i] += 1
    dsum = np.cumsum(d)
    bad_d = sum(arith.summatory_divisor(float(x)) != dsum[x]
                for x in range(1, X + 1))
    t_div = time.time() - t0

    t0 = time.time()
    r = np.zeros(X + 1, dtype=np.int64)
    amax = math.isqrt(X)
    for a in range(-amax, amax + 1):
        bmax = math.isqrt(X - a * a)
        bs = np.arange(-bmax, bmax + 1)
        np.add.at(r, a * a + bs * bs, 1)
    rsum = np.cumsum(r)  # index 0 counts the origin
    bad_r = sum(arith.lattice_count(float(x)) - 1 != rsum[x] - 1
                for x in range(1, X + 1))
    t_lat = time.time() - t0

    _verdict(
        1, bad_d == 0 and bad_r == 0 and t_div < 10 and t_lat < 10,
        f"naive-sieve equality on x <= 1e5: divisor mismatches {bad_d} "
        f"({t_div:.1f}s), lattice mismatches {bad_r} ({t_lat:.1f}s)")


# --------------------------------------------------------------- criterion 2


def _zeta_euler_maclaurin(s: float, terms: int = 200) -> float:
    """zeta(s) by direct series plus the first Euler-Maclaurin corrections;
    error O(terms^(-s-3)), far below the 2% gate."""
    n = terms
    total = math.fsum(k**-s for k in range(1, n + 1))
    return total + n ** (1 - s) / (s - 1) - 0.5 * n**-s + s * n ** (-s - 1) / 12.0


def test_criterion_02_model_variance_vs_zeta_limit():
    limit = _zeta_euler_maclaurin(1.5) ** 4 / (
        4 * math.pi**2 * _zeta_euler_maclaurin(3.0))
    # frozen oracle for the zeta expression itself
    assert limit == pytest.approx(0.9814259662632684, rel=1e-10)
    got = model.variance_closed_form("divisor", 10**4, 10**3).value
    rel = abs(got - limit) / limit
    _verdict(
        2, rel <= 0.02,
        f"variance(divisor, 1e4, 1e3) = {got:.6f} vs zeta limit {limit:.6f}, "
        f"rel diff {100 * rel:.2f}% (gate 2%)")


# --------------------------------------------------------------- criterion 3


def test_criterion_03_diagonal_moment_bound_box():
    t0 = time.time()
    checked, worst, degenerate_ok = 0, 0.0, True
    for family in ("divisor", "circle"):
        for L in (2, 5):
            for N in range(1, 20):
                for M in range(N + 1, 21):
                    spec = model.ModelSpec(family, M - 1, L, kernel_lo=N,
                                           include_amplitude=False)
                    for k in range(1, 5):
                        ex = model.exact_moment(spec, 2 * k).value
                        bd = model.moment_upper_bound(family, N, M, L, k)
                        checked += 1
                        if bd == 0.0:
                            # circle windows whose r-counts all vanish: the
                            # series is empty, so the moments must be 0 too
                            degenerate_ok &= ex == 0.0
                        else:
                            worst = max(worst, ex / bd)
    _verdict(
        3, worst <= 1.0 + 1e-12 and degenerate_ok and time.time() - t0 < 60,
        f"exact_moment(2k) <= bound on {checked} cases "
        f"(N<M<=20, L in {{2,5}}, k<=4, both families); "
        f"worst ratio {worst:.6f} ({time.time() - t0:.1f}s)")


# --------------------------------------------------------------- criterion 4


def test_criterion_04_monte_carlo_vs_exact_moments():
    spec = model.ModelSpec("divisor", 6, 2)
    assert spec.table().term_count <= 12
    batch = model.sample(spec, 10**6, 3)
    zs = []
    for k in (2, 3, 4):
        emp = empirics.empirical_moment(batch.values, k)
        exact = model.exact_moment(spec, k).value
        zs.append(abs(emp.value - exact) / emp.error_bound)
    _verdict(
        4, max(zs) <= 4.0,
        "MC(1e6, seed 3) vs exact moments, divisor (6,2): z-scores "
        + ", ".join(f"k={k}: {z:.2f}" for k, z in zip((2, 3, 4), zs))
        + " (gate 4)")


# --------------------------------------------------------------- criterion 5


def test_criterion_05_moment_matching():
    t0 = time.time()
    diffs, admissible = [], []
    for weights in ("unit", "alternating"):
        for h in (1, 2, 3):
            rep = empirics.moment_match_report(
                "divisor", 1e8, 10, h, weights=weights,
                grid_count=10**6, seed=0)
            diffs.append((weights, h, abs(rep.difference)))
            admissible.append(rep.admissible)
    worst = max(d for _, _, d in diffs)
    _verdict(
        5, worst <= 0.01 and time.time() - t0 < 300,
        f"T=1e8 M=10 h in {{1,2,3}}, both weightings: max|empirical-exact| "
        f"= {worst:.4f} (gate 0.01); admissible flags {admissible} logged, "
        f"not enforced ({time.time() - t0:.1f}s)")


# --------------------------------------------------------------- criterion 6


def test_criterion_06_distributional_agreement():
    t0 = time.time()
    grid = empirics.t_grid(1e8, 10**5, "jittered-stratified", 101)
    ks = {}
    for family, model_seed in (("divisor", 202), ("circle", 203)):
        spec = series.SeriesSpec(family, 500)
        sv = series.evaluate_grid(spec, grid.points)
        mb = model.sample(model.matched_model(spec), 10**5, model_seed)
        ks[family] = empirics.ks_distance(
            empirics.empirical_cdf(sv), empirics.empirical_cdf(mb.values))
    _verdict(
        6, max(ks.values()) <= 0.02 and time.time() - t0 < 600,
        f"KS(F_500 scan over [1e8,2e8], model) = {ks['divisor']:.4f}, "
        f"circle {ks['circle']:.4f} (gate 0.02, 1e5 points each, "
        f"{time.time() - t0:.0f}s)")


# --------------------------------------------------------------- criterion 7


def test_criterion_07_l2_closeness():
    t0 = time.time()
    grid = empirics.t_grid(1e8, 10**4, "jittered-stratified", 0)
    delta = np.array([arith.error_term("divisor", float(t)).remainder
                      for t in grid.points])
    f_exact = delta / grid.points**0.25
    l2 = []
    for N in (10, 100, 1000):
        fn = series.evaluate_grid(series.SeriesSpec("divisor", N), grid.points)
        l2.append(float(np.mean((f_exact - fn) ** 2)))
    nonincreasing = l2[0] >= l2[1] >= l2[2]
    _verdict(
        7, nonincreasing and l2[2] <= 0.05,
        f"mean|F - F_N|^2 over 1e4 exact points: "
        f"N=10: {l2[0]:.4f}, N=100: {l2[1]:.4f}, N=1000: {l2[2]:.4f} "
        f"(nonincreasing {nonincreasing}, gate 0.05 at N=1000, "
        f"{time.time() - t0:.0f}s)")


# --------------------------------------------------------------- criterion 8


def test_criterion_08_laplace_agreement():
    t0 = time.time()
    spec = series.SeriesSpec("divisor", 500)
    grid = empirics.t_grid(1e8, 2 * 10**6, "jittered-stratified", 0)
    values = series.evaluate_grid(spec, grid.points)
    policy = empirics.clip_policy(1e8, 10.0)
    matched = model.matched_model(spec)
    rels = []
    for lam in (0.5, 1.0, 2.0):
        emp = empirics.clipped_laplace(values, lam, policy.V)
        mod = model.laplace(matched, lam)
        rels.append(abs(emp.value - mod) / mod)
    _verdict(
        8, max(rels) <= 0.05 and time.time() - t0 < 600,
        f"clipped Laplace (V={policy.V:.3f}, 2e6-point grid) vs model: "
        f"rel diffs " + ", ".join(
            f"lam={l}: {100 * r:.2f}%" for l, r in zip((0.5, 1.0, 2.0), rels))
        + f" (gate 5%, {time.time() - t0:.0f}s)")


# --------------------------------------------------------------- criterion 9


def test_criterion_09_hughes_rudnick_box():
    t0 = time.time()
    failures, cases = [], 0
    for m in range(1, 5):
        for M in range(1, 31):
            res = independence.exhaustive_verify(M, m)
            cases += 1
            if not res.holds:
                failures.append((M, m))
    _verdict(
        9, not failures and time.time() - t0 < 600,
        f"certified minimum >= (m sqrt M)^(1 - 2^(m-1)) on all {cases} "
        f"(M <= 30, m <= 4) boxes; failures {failures or 'none'} "
        f"({time.time() - t0:.0f}s)")


# -------------------------------------------------------------- criterion 10


def test_criterion_10_tail_sandwich_and_fit():
    t0 = time.time()
    spec = model.ModelSpec("divisor", 100, 100)
    curve = tails.model_curve(spec, 32.0)
    rep = tails.tail_report(spec, [0.5, 1.0, 1.5, 2.0], 10**6, 20240817,
                            curve=curve)
    sandwich = True
    for v, ch, pz, mc, ci, _ in rep.rows():
        if pz is not None and pz > mc + ci:
            sandwich = False
        if mc + ci > ch + 2 * ci:
            sandwich = False
    vfit = np.array([1.5, 1.75, 2.0, 2.25, 2.5, 2.75, 3.0])
    rep2 = tails.tail_report(spec, vfit, 10**6, 20240817, curve=curve)
    slope = tails.fit_exponent(np.array(rep2.v_grid), np.array(rep2.mc))
    _verdict(
        10, sandwich and 3.0 <= slope <= 5.0,
        f"pz <= mc+4s <= chernov+8s on V in {{0.5,1,1.5,2}}: {sandwich}; "
        f"fitted MC tail exponent over [1.5,3] = {slope:.3f} (gate [3,5], "
        f"{time.time() - t0:.0f}s)")


# -------------------------------------------------------------- criterion 11


def test_criterion_11_transform_sanity():
    one = model.char_fn(model.ModelSpec("divisor", 10, 10), 0.0)
    exact_one = one == 1.0 + 0.0j
    alphas = np.linspace(0.0, 20.0, 100)
    spec = model.ModelSpec("divisor", 10, 10)
    max_mod = max(abs(model.char_fn(spec, float(a))) for a in alphas)
    ms1 = model.ModelSpec("divisor", 1, 1)
    c0 = 1.0 / (math.pi * math.sqrt(2.0))
    bessel_err = max(
        abs(model.char_fn(ms1, float(a)).real - j0(a * c0))
        for a in np.linspace(0.5, 9.5, 10))
    _verdict(
        11,
        exact_one and max_mod <= 1.0 + 1e-12 and bessel_err <= 1e-8,
        f"char_fn(0) == 1 exactly: {exact_one}; max|char_fn| on 100-point "
        f"grid = {max_mod:.6f}; single-term vs J0 max err = {bessel_err:.2e} "
        f"(gate 1e-8)")
