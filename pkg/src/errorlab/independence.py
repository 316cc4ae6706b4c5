"""Linear relations among square roots of integers.

Zero detection is purely algebraic: sqrt(n) with n = m r^2 (m squarefree)
contributes r to the kernel-m coordinate, and a signed sum vanishes iff
every kernel coordinate does.  Numerics only ever certify *nonzero* sums
away from zero, with adaptive-precision interval arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations_with_replacement, product

import mpmath as mp
import numpy as np

from .arith import squarefree_decompose
from .errors import PrecisionError, ResourceBudgetError, UsageError
from .rng import STREAM_SEARCH, uniform

_PREC_START = 64
_PREC_CEIL = 4096
_REPORT_DIGITS = 25


@dataclass(frozen=True)
class SignedRadicalSum:
    """sum_j eps_j sqrt(n_j) with eps_j = +-1 and 1 <= n_j <= M."""

    terms: tuple
    M: int

    def __post_init__(self):
        if not self.terms:
            raise UsageError("need at least one term")
        for eps, n in self.terms:
            if eps not in (-1, 1):
                raise UsageError("signs must be +-1")
            if not 1 <= n <= self.M:
                raise UsageError(f"term {n} outside [1, {self.M}]")


@dataclass(frozen=True)
class RelationReport:
    is_zero: bool
    kernel_sums: dict


def _kernel_vector(terms) -> dict:
    sums: dict[int, int] = {}
    for eps, n in terms:
        dec = squarefree_decompose(int(n))
        sums[dec.kernel] = sums.get(dec.kernel, 0) + eps * dec.cofactor
    return {k: v for k, v in sums.items() if v != 0}


def detect_relation(s: SignedRadicalSum) -> RelationReport:
    """Exact rational-independence decision: decompose n_j = m_j r_j^2 and
    sum eps_j r_j per squarefree kernel m_j; zero iff all kernel sums are 0."""
    sums = _kernel_vector(s.terms)
    return RelationReport(is_zero=not sums, kernel_sums=sums)


# ------------------------------------------------------------ lower bound


@dataclass(frozen=True)
class HRBound:
    value: float       # 0.0 when the double underflows
    log_value: float   # natural log of the bound, always meaningful
    underflowed: bool

    def __float__(self) -> float:
        return self.value


def hr_lower_bound(m: int, M: int) -> HRBound:
    """1 / (m sqrt(M))^(2^(m-1) - 1): any nonzero signed sum of m square
    roots of integers <= M is at least this large."""
    if m < 1 or M < 1:
        raise UsageError("need m >= 1 and M >= 1")
    expo = 2 ** (m - 1) - 1
    if expo == 0:
        return HRBound(value=1.0, log_value=0.0, underflowed=False)
    log_base = math.log(m) + 0.5 * math.log(M)
    try:
        log_value = -expo * log_base
    except OverflowError:
        return HRBound(value=0.0, log_value=-math.inf, underflowed=True)
    if log_value < -745.0 or not math.isfinite(log_value):
        return HRBound(value=0.0, log_value=log_value, underflowed=True)
    # squeeze out the last digits in extended precision before rounding
    with mp.workdps(40):
        value = float(mp.power(mp.mpf(m) * mp.sqrt(M), -expo))
    return HRBound(value=value, log_value=log_value, underflowed=False)


# ------------------------------------------------- certified verification


def _certify(vec: dict, M: int, prec: int):
    """Interval for |sum_k c_k sqrt(k)| at the given precision, or None if
    the interval still straddles zero.  Endpoints come back as exact mpf
    snapshots (outward rounding is the interval context's job)."""
    old_prec = mp.iv.prec
    mp.iv.prec = prec
    try:
        roots = _certify.cache.get((M, prec))
        if roots is None:
            roots = {k: mp.iv.sqrt(k) for k in range(1, M + 1)}
            _certify.cache[(M, prec)] = roots
        total = mp.iv.mpf(0)
        for k, c in vec.items():
            total += c * roots[k]
        if 0 in total:
            return None
        a = abs(total)
        with mp.workprec(prec):
            return (mp.mpf(a.a), mp.mpf(a.b))
    finally:
        mp.iv.prec = old_prec


_certify.cache = {}


@dataclass(frozen=True)
class VerifyResult:
    M: int
    m: int
    min_lower: float
    min_upper: float
    min_lower_str: str     # decimal, outward-rounded certified endpoints
    min_upper_str: str
    witness: tuple         # ((eps, n), ...) attaining the minimum
    bound: HRBound
    holds: bool
    enumerated: int        # sign/value tuples covered (up to symmetry)
    distinct_forms: int    # distinct nonzero kernel vectors certified
    precision_bits: int


def _enumerate_forms(M: int, m: int):
    """Distinct nonzero kernel vectors over all sign/value tuples, with one
    witness tuple each.  Global sign flips and orderings are quotiented out
    (|sum| is invariant), so signs fix eps_1 = +1."""
    forms: dict[tuple, tuple] = {}
    enumerated = 0
    for values in combinations_with_replacement(range(1, M + 1), m):
        for signs in product((1, -1), repeat=m - 1):
            eps = (1,) + signs
            enumerated += 1
            terms = tuple(zip(eps, values))
            vec = _kernel_vector(terms)
            if not vec:
                continue
            key = tuple(sorted(vec.items()))
            if key not in forms:
                forms[key] = terms
    return forms, enumerated


def exhaustive_verify(M: int, m: int, cap: int = 2 * 10**7) -> VerifyResult:
    """Certify the minimum nonzero |sum of m signed sqrt(n)|, n <= M, and
    compare against hr_lower_bound(m, M).  Exact zeros are skipped
    algebraically; every surviving kernel vector is certified nonzero by
    interval arithmetic whose precision doubles on demand."""
    if M < 1 or m < 1:
        raise UsageError("need M >= 1 and m >= 1")
    if (2 * M) ** m > cap:
        raise ResourceBudgetError(f"(2M)^m = {(2*M)**m} exceeds the cap {cap}")
    forms, enumerated = _enumerate_forms(M, m)
    if not forms:
        raise PrecisionError("no nonzero sums to certify")

    best_key = None
    best_lo = best_hi = None
    prec = _PREC_START
    for key, terms in forms.items():
        vec = dict(key)
        p = prec
        iv = _certify(vec, M, p)
        while iv is None:
            p *= 2
            if p > _PREC_CEIL:
                raise PrecisionError("interval certification hit the precision ceiling")
            iv = _certify(vec, M, p)
        lo, hi = iv
        if best_lo is None or lo < best_lo:
            best_key, best_lo, best_hi = key, lo, hi

    # refine the champion until its interval is tight enough to report
    prec = _PREC_START
    target = mp.mpf(10) ** (-_REPORT_DIGITS)
    while True:
        iv = _certify(dict(best_key), M, prec)
        if iv is not None and (iv[1] - iv[0]) <= target * iv[0]:
            best_lo, best_hi = iv
            break
        prec *= 2
        if prec > _PREC_CEIL:
            raise PrecisionError("interval refinement hit the precision ceiling")

    bound = hr_lower_bound(m, M)
    with mp.workdps(_REPORT_DIGITS + 5):
        lo_str = mp.nstr(best_lo, _REPORT_DIGITS, strip_zeros=False)
        hi_str = mp.nstr(best_hi, _REPORT_DIGITS, strip_zeros=False)
    return VerifyResult(
        M=M, m=m,
        min_lower=float(best_lo), min_upper=float(best_hi),
        min_lower_str=lo_str, min_upper_str=hi_str,
        witness=forms[best_key],
        bound=bound,
        holds=bool(best_lo >= bound.value),
        enumerated=enumerated,
        distinct_forms=len(forms),
        precision_bits=prec,
    )


def certificate(result: VerifyResult) -> dict:
    return {
        "kind": "independence-verify",
        "M": result.M,
        "m": result.m,
        "bound": result.bound.value,
        "bound_log": result.bound.log_value,
        "min_nonzero": {
            "lower": result.min_lower_str,
            "upper": result.min_upper_str,
            "precision_bits": result.precision_bits,
        },
        "witness": [[eps, n] for eps, n in result.witness],
        "holds": result.holds,
        "enumerated": result.enumerated,
        "distinct_forms": result.distinct_forms,
    }


# --------------------------------------------------------- heuristic search


@dataclass(frozen=True)
class SearchResult:
    M: int
    m: int
    budget: int
    seed: int
    best_abs: float
    witness: tuple
    evaluated: int
    exhaustive: bool


def _float_abs_sum(vec: dict) -> float:
    return abs(math.fsum(c * math.sqrt(k) for k, c in vec.items()))


def near_relation_search(M: int, m: int, budget: int, seed: int = 0) -> SearchResult:
    """Smallest nonzero |sum| found within the budget.  Covers the whole
    (quotiented) tuple space exhaustively when the budget allows; otherwise
    draws counter-indexed random tuples, so growing the budget only extends
    the same search sequence (the record is monotone in the budget)."""
    if M < 1 or m < 1 or budget < 1:
        raise UsageError("need M >= 1, m >= 1, budget >= 1")
    n_tuples = math.comb(M + m - 1, m) * 2 ** (m - 1)
    if n_tuples <= budget:
        forms, _ = _enumerate_forms(M, m)
        best, best_terms = math.inf, None
        for key, terms in forms.items():
            v = _float_abs_sum(dict(key))
            if v < best:
                best, best_terms = v, terms
        if best_terms is None:
            raise PrecisionError("no nonzero sums in range")
        return SearchResult(M=M, m=m, budget=budget, seed=int(seed),
                            best_abs=best, witness=best_terms,
                            evaluated=n_tuples, exhaustive=True)

    seed_u = np.uint64(int(seed))  # full 64-bit seed range survives the jit boundary
    best, best_terms = math.inf, None
    for i in range(budget):
        terms = []
        for j in range(m):
            n = 1 + int(uniform(seed_u, i, j, STREAM_SEARCH) * M)
            n = min(n, M)
            eps = 1 if uniform(seed_u, i, m + j, STREAM_SEARCH) < 0.5 else -1
            terms.append((eps, n))
        vec = _kernel_vector(terms)
        if not vec:
            continue
        v = _float_abs_sum(vec)
        if v < best:
            best, best_terms = v, tuple(terms)
    if best_terms is None:
        # every draw was an exact zero; astronomically unlikely for M >= 2
        raise PrecisionError("search found no nonzero sums within budget")
    return SearchResult(M=M, m=m, budget=budget, seed=int(seed),
                        best_abs=best, witness=best_terms,
                        evaluated=budget, exhaustive=False)
