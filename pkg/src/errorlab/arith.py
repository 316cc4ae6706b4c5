"""Exact integer arithmetic: sieves, squarefree structure, O(sqrt x) summatory
functions, and the error terms of the two counting problems.

Everything here is exact.  Floor square roots are integer square roots with a
correction step, never rounded floats; summatory accumulators are either
Python integers or int64 sums arranged in geometric blocks so that no block
can wrap.  Main terms are evaluated with mpmath at MAIN_TERM_DPS digits and
rounded once at the end, so repeated calls are bit-identical.
"""

from __future__ import annotations

import math
import os
import struct
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import mpmath as mp
import numpy as np
from numba import njit

from .constants import EULER_GAMMA_STR, MAIN_TERM_DPS
from .errors import AccumulatorOverflowError, ResourceBudgetError, UsageError

_MAX_SIEVE = 200_000_000          # u32 table memory guard (~800 MB)
_MAX_EXACT_X = 4 * 10**18         # geometric int64 blocks stay exact below this
_NUMBA_FAST_X = 10**15            # single int64 accumulator is safe below this

CACHE_ENV_VAR = "ERRORLAB_CACHE_DIR"


# ---------------------------------------------------------------- sieves

@njit(cache=True)
def _fill_divisor_sieve(values):
    limit = values.size - 1
    for k in range(1, limit + 1):
        for m in range(k, limit + 1, k):
            values[m] += 1


@njit(cache=True)
def _fill_two_squares_sieve(values):
    # r(n) over all of Z^2: weight 4 split by the sign patterns of (a, b)
    limit = values.size - 1
    amax = int(math.sqrt(float(limit)))
    while (amax + 1) * (amax + 1) <= limit:
        amax += 1
    for a in range(amax + 1):
        rest = limit - a * a
        bmax = int(math.sqrt(float(rest)))
        while (bmax + 1) * (bmax + 1) <= rest:
            bmax += 1
        while bmax * bmax > rest:
            bmax -= 1
        wa = 2 if a > 0 else 1
        for b in range(bmax + 1):
            wb = 2 if b > 0 else 1
            values[a * a + b * b] += wa * wb
    values[0] = 0


@njit(cache=True)
def _fill_spf_sieve(spf):
    limit = spf.size - 1
    for i in range(2, limit + 1):
        if spf[i] == 0:
            for m in range(i, limit + 1, i):
                if spf[m] == 0:
                    spf[m] = i


def _compute_table(kind: int, limit: int) -> np.ndarray:
    if kind == 0:
        values = np.zeros(limit + 1, dtype=np.uint32)
        _fill_divisor_sieve(values)
    elif kind == 1:
        values = np.zeros(limit + 1, dtype=np.uint32)
        _fill_two_squares_sieve(values)
    else:
        raise UsageError(f"unknown table kind {kind}")
    return values


# ------------------------------------------------------- cache persistence

_MAGIC = b"ETLB"
_FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sHBQ")  # magic, version u16, kind u8, limit u64

TABLE_KIND_DIVISOR = 0
TABLE_KIND_TWO_SQUARES = 1
_KIND_NAMES = {0: "divisor", 1: "two-squares"}


def cache_dir() -> Path:
    root = os.environ.get(CACHE_ENV_VAR)
    if root:
        return Path(root)
    xdg = os.environ.get("XDG_CACHE_HOME")
    base = Path(xdg) if xdg else Path.home() / ".cache"
    return base / "errorlab"


def _table_path(kind: int, limit: int) -> Path:
    return cache_dir() / f"sieve-{_KIND_NAMES[kind]}-{limit}.etlb"


def write_table_file(path: Path, kind: int, limit: int, values: np.ndarray) -> None:
    """Serialize entries 1..limit as little-endian u32 after the header."""
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = np.ascontiguousarray(values[1 : limit + 1], dtype="<u4")
    tmp = path.with_suffix(".tmp")
    with open(tmp, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, _FORMAT_VERSION, kind, limit))
        fh.write(payload.tobytes())
    tmp.replace(path)


def read_table_file(path: Path) -> tuple[int, int, np.ndarray]:
    """Return (kind, limit, values) with values indexed 0..limit, entry 0 = 0."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise UsageError(f"{path}: truncated sieve cache file")
    magic, version, kind, limit = _HEADER.unpack_from(raw)
    if magic != _MAGIC:
        raise UsageError(f"{path}: bad magic {magic!r}")
    if version != _FORMAT_VERSION:
        raise UsageError(f"{path}: unsupported format version {version}")
    body = raw[_HEADER.size :]
    if len(body) != 4 * limit:
        raise UsageError(f"{path}: payload length {len(body)} != 4*limit")
    values = np.zeros(limit + 1, dtype=np.uint32)
    values[1:] = np.frombuffer(body, dtype="<u4")
    return kind, limit, values


@lru_cache(maxsize=8)
def _cached_table(kind: int, limit: int, use_disk: bool) -> np.ndarray:
    if use_disk:
        path = _table_path(kind, limit)
        if path.exists():
            _, _, values = read_table_file(path)
            return values
    values = _compute_table(kind, limit)
    if use_disk:
        try:
            write_table_file(_table_path(kind, limit), kind, limit, values)
        except OSError:
            pass  # cache is best-effort; the computed table is still valid
    return values


def _check_sieve_limit(limit: int) -> int:
    limit = int(limit)
    if limit < 1:
        raise UsageError("sieve limit must be >= 1")
    if limit > _MAX_SIEVE:
        raise ResourceBudgetError(
            f"sieve limit {limit} exceeds the memory guard {_MAX_SIEVE}"
        )
    return limit


def divisor_table(limit: int, use_cache: bool = True) -> np.ndarray:
    """d(n) for 1 <= n <= limit (entry 0 is 0)."""
    return _cached_table(TABLE_KIND_DIVISOR, _check_sieve_limit(limit), use_cache)


def two_squares_table(limit: int, use_cache: bool = True) -> np.ndarray:
    """r(n) = #{(a,b) in Z^2 : a^2+b^2 = n} for 1 <= n <= limit."""
    return _cached_table(TABLE_KIND_TWO_SQUARES, _check_sieve_limit(limit), use_cache)


def cache_status() -> list[dict]:
    """One entry per cache file: kind, limit, bytes, path."""
    root = cache_dir()
    out = []
    if root.is_dir():
        for path in sorted(root.glob("sieve-*.etlb")):
            try:
                kind, limit, _ = read_table_file(path)
            except UsageError:
                continue
            out.append(
                {
                    "kind": _KIND_NAMES[kind],
                    "limit": limit,
                    "bytes": path.stat().st_size,
                    "path": str(path),
                }
            )
    return out


def cache_clear() -> int:
    root = cache_dir()
    n = 0
    if root.is_dir():
        for path in root.glob("sieve-*.etlb"):
            path.unlink()
            n += 1
    _cached_table.cache_clear()
    return n


def cache_build(limit: int) -> list[dict]:
    divisor_table(limit, use_cache=True)
    two_squares_table(limit, use_cache=True)
    return cache_status()


@lru_cache(maxsize=4)
def spf_table(limit: int) -> np.ndarray:
    """Smallest prime factor for 0..limit (0 for 0, 1, and primes are their own)."""
    limit = _check_sieve_limit(limit)
    spf = np.zeros(limit + 1, dtype=np.int64)
    _fill_spf_sieve(spf)
    return spf


@lru_cache(maxsize=4)
def squarefree_flags(limit: int) -> np.ndarray:
    """Boolean array: entry n is True iff n is squarefree (entry 0 False)."""
    limit = _check_sieve_limit(limit)
    flags = np.ones(limit + 1, dtype=bool)
    flags[0] = False
    p = 2
    while p * p <= limit:
        if spf_table(limit)[p] == p:
            flags[p * p :: p * p] = False
        p += 1
    return flags


def primes_up_to(limit: int) -> np.ndarray:
    spf = spf_table(limit)
    idx = np.arange(limit + 1)
    return idx[(idx >= 2) & (spf == idx)]


# ------------------------------------------------ factorization and kappas

def factorize(n: int) -> list[tuple[int, int]]:
    """Prime factorization by trial division, (p, e) pairs in increasing p."""
    if n < 1:
        raise UsageError("factorize requires n >= 1")
    out = []
    m = int(n)
    p = 2
    while p * p <= m:
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            out.append((p, e))
        p += 1 if p == 2 else 2
    if m > 1:
        out.append((m, 1))
    return out


@dataclass(frozen=True)
class SquarefreeDecomposition:
    """n = kernel * cofactor^2 with kernel squarefree."""

    kernel: int
    cofactor: int

    @property
    def n(self) -> int:
        return self.kernel * self.cofactor * self.cofactor


def squarefree_decompose(n: int) -> SquarefreeDecomposition:
    if n < 1:
        raise UsageError("squarefree_decompose requires n >= 1")
    kernel = 1
    cofactor = 1
    for p, e in factorize(n):
        if e % 2:
            kernel *= p
        cofactor *= p ** (e // 2)
    return SquarefreeDecomposition(kernel, cofactor)


def divisor_count(n: int) -> int:
    """d(n) multiplicatively; the scalar route independent of the sieve."""
    out = 1
    for _, e in factorize(n):
        out *= e + 1
    return out


def two_squares_count(n: int) -> int:
    """r(n) via the multiplicative structure of r/4."""
    if n < 1:
        raise UsageError("two_squares_count requires n >= 1")
    out = 4
    for p, e in factorize(n):
        if p == 2:
            continue
        if p % 4 == 1:
            out *= e + 1
        elif e % 2:
            return 0
    return out


# ------------------------------------------------------------- summatory

@njit(cache=True)
def _isqrt64(x):
    # exact integer sqrt for 0 <= x < 2^63
    if x <= 0:
        return 0
    s = int(math.sqrt(float(x)))
    while s * s > x:
        s -= 1
    while (s + 1) * (s + 1) <= x:
        s += 1
    return s


@njit(cache=True)
def _hyperbola_block(x, lo, hi):
    # sum_{k=lo}^{hi-1} x // k; caller guarantees the block sum fits int64
    acc = 0
    for k in range(lo, hi):
        acc += x // k
    return acc


def summatory_divisor(x) -> int:
    """D(x) = sum of d(n) over n <= x, by the hyperbola identity
    2*sum_{k<=sqrt(x)} floor(x/k) - floor(sqrt(x))^2.  Exact.
    """
    xi = _floor_to_int(x)
    if xi < 1:
        raise UsageError("summatory_divisor requires x >= 1")
    if xi > _MAX_EXACT_X:
        raise AccumulatorOverflowError(
            f"x = {xi} exceeds the exact accumulator range {_MAX_EXACT_X}"
        )
    s = math.isqrt(xi)
    if xi <= _NUMBA_FAST_X:
        total = int(_hyperbola_block(xi, 1, s + 1))
    else:
        # geometric blocks: sum over [a, 2a) is at most a * (x/a) = x < 2^63
        total = 0
        a = 1
        while a <= s:
            b = min(2 * a, s + 1)
            total += int(_hyperbola_block(xi, a, b))
            a = b
    return 2 * total - s * s


@njit(cache=True)
def _lattice_block(x, alo, ahi):
    # sum over a in [alo, ahi) of (2*floor(sqrt(x - a^2)) + 1)
    acc = 0
    for a in range(alo, ahi):
        acc += 2 * _isqrt64(x - a * a) + 1
    return acc


def _floor_to_int(x) -> int:
    if isinstance(x, (int, np.integer)):
        return int(x)
    return math.floor(x)


def lattice_count(x) -> int:
    """N(x) = #{(a,b) in Z^2 : a^2 + b^2 <= x} for real x >= 0.  Exact.

    The b-range per column uses integer square roots of floor(x - a^2);
    for non-integer x the comparison b^2 <= x - a^2 is equivalent to
    b^2 <= floor(x - a^2) only when x - a^2 is not an integer boundary,
    so the column height is computed against floor(x) shifted exactly.
    """
    if x < 0:
        raise UsageError("lattice_count requires x >= 0")
    xi = _floor_to_int(x)  # a^2 + b^2 <= x iff <= floor(x) for integers
    if xi > _MAX_EXACT_X:
        raise AccumulatorOverflowError(
            f"x = {x} exceeds the exact accumulator range {_MAX_EXACT_X}"
        )
    if xi == 0:
        return 1
    s = math.isqrt(xi)
    if xi <= _NUMBA_FAST_X:
        one_sided = int(_lattice_block(xi, 1, s + 1))
    else:
        one_sided = 0
        a = 1
        while a <= s:
            b = min(2 * a, s + 1)
            one_sided += int(_lattice_block(xi, a, b))
            a = b
    return 2 * one_sided + 2 * s + 1


# ------------------------------------------------------------ error terms

@dataclass(frozen=True)
class ErrorTermValue:
    """Exact counting sum minus the smooth main term at a single point."""

    family: str
    x: float
    counting: int
    main_term: float
    remainder: float


def _gamma_mp() -> mp.mpf:
    return mp.mpf(EULER_GAMMA_STR)


def delta(x) -> ErrorTermValue:
    """Remainder of the divisor counting function at real x > 1."""
    if x <= 1:
        raise UsageError("delta requires x > 1")
    d_sum = summatory_divisor(x)
    with mp.workdps(MAIN_TERM_DPS):
        xm = mp.mpf(x)
        main = xm * (mp.log(xm) + 2 * _gamma_mp() - 1)
        rem = float(mp.mpf(d_sum) - main)
        main_f = float(main)
    return ErrorTermValue("divisor", float(x), d_sum, main_f, rem)


def p_error(x) -> ErrorTermValue:
    """Remainder of the disk lattice count at real x > 0 (origin excluded)."""
    if x <= 0:
        raise UsageError("p_error requires x > 0")
    r_sum = lattice_count(x) - 1
    with mp.workdps(MAIN_TERM_DPS):
        xm = mp.mpf(x)
        main = mp.pi * xm
        rem = float(mp.mpf(r_sum) - main)
        main_f = float(main)
    return ErrorTermValue("circle", float(x), r_sum, main_f, rem)


def error_term(family: str, x) -> ErrorTermValue:
    if family == "divisor":
        return delta(x)
    if family == "circle":
        return p_error(x)
    raise UsageError(f"no exact error term for family {family!r}")


def normalized_remainder(family: str, t) -> float:
    """t^(-1/4) * remainder for the divisor family; t^(-1/4) * P(t) for circle."""
    value = error_term(family, t)
    return value.remainder / float(t) ** 0.25


# ------------------------------------------------------ bulk (array) paths

@njit(cache=True)
def _delta_bulk_fill(ts, out, gamma):
    for i in range(ts.size):
        x = ts[i]
        xi = int(math.floor(x))
        s = _isqrt64(xi)
        acc = 0
        for k in range(1, s + 1):
            acc += xi // k
        d_sum = 2 * acc - s * s
        out[i] = d_sum - x * (math.log(x) + 2.0 * gamma - 1.0)


@njit(cache=True)
def _p_error_bulk_fill(ts, out):
    for i in range(ts.size):
        x = ts[i]
        xi = int(math.floor(x))
        s = _isqrt64(xi)
        acc = 0
        for a in range(1, s + 1):
            acc += 2 * _isqrt64(xi - a * a) + 1
        n_count = 2 * acc + 2 * s + 1
        out[i] = (n_count - 1) - math.pi * x


def delta_bulk(ts: np.ndarray) -> np.ndarray:
    """Exact D(floor t) minus float64 main term, per point.

    Main-term roundoff is ~x*1e-16 absolute, far below the remainder scale
    for x <= 1e12; the scalar `delta` is the high-precision reference.
    """
    ts = np.asarray(ts, dtype=np.float64)
    if ts.size == 0 or ts.min() <= 1:
        raise UsageError("delta_bulk requires all t > 1")
    if ts.max() > _NUMBA_FAST_X:
        raise AccumulatorOverflowError("delta_bulk is guarded to t <= 1e15")
    out = np.empty_like(ts)
    from .constants import EULER_GAMMA

    _delta_bulk_fill(ts, out, EULER_GAMMA)
    return out


def p_error_bulk(ts: np.ndarray) -> np.ndarray:
    ts = np.asarray(ts, dtype=np.float64)
    if ts.size == 0 or ts.min() <= 0:
        raise UsageError("p_error_bulk requires all t > 0")
    if ts.max() > _NUMBA_FAST_X:
        raise AccumulatorOverflowError("p_error_bulk is guarded to t <= 1e15")
    out = np.empty_like(ts)
    _p_error_bulk_fill(ts, out)
    return out


# --------------------------------------- segmented values for jump scans

@njit(cache=True)
def _segmented_divisor_fill(lo, hi, primes, dv, rem):
    for i in range(hi - lo):
        dv[i] = 1
        rem[i] = lo + i
    for pi in range(primes.size):
        p = primes[pi]
        if p * p >= hi:
            break
        start = ((lo + p - 1) // p) * p
        for m in range(start, hi, p):
            i = m - lo
            e = 0
            while rem[i] % p == 0:
                rem[i] //= p
                e += 1
            dv[i] *= e + 1
    for i in range(hi - lo):
        if rem[i] > 1:
            dv[i] *= 2


@njit(cache=True)
def _segmented_two_squares_fill(lo, hi, primes, rv, rem):
    for i in range(hi - lo):
        rv[i] = 4
        rem[i] = lo + i
    for pi in range(primes.size):
        p = primes[pi]
        if p * p >= hi:
            break
        start = ((lo + p - 1) // p) * p
        for m in range(start, hi, p):
            i = m - lo
            e = 0
            while rem[i] % p == 0:
                rem[i] //= p
                e += 1
            if p == 2:
                continue
            if p % 4 == 1:
                rv[i] *= e + 1
            elif e % 2 == 1:
                rv[i] = 0
    for i in range(hi - lo):
        if rem[i] > 1:
            # leftover prime factor > sqrt(hi), exponent 1
            if rem[i] % 4 == 1 or rem[i] == 2:
                rv[i] *= 2
            elif rem[i] % 4 == 3:
                rv[i] = 0


def _segmented_values(lo: int, hi: int, kind: int) -> np.ndarray:
    if not (1 <= lo < hi):
        raise UsageError("need 1 <= lo < hi")
    if hi - lo > 10**8:
        raise ResourceBudgetError("segment longer than 1e8")
    root = math.isqrt(hi - 1) + 1
    primes = primes_up_to(max(root, 3)).astype(np.int64)
    rem = np.empty(hi - lo, dtype=np.int64)
    vals = np.empty(hi - lo, dtype=np.int64)
    if kind == TABLE_KIND_DIVISOR:
        _segmented_divisor_fill(lo, hi, primes, vals, rem)
    else:
        _segmented_two_squares_fill(lo, hi, primes, vals, rem)
    return vals


def divisor_values_range(lo: int, hi: int) -> np.ndarray:
    """d(n) for n in [lo, hi), computed segment-wise (lo may be large)."""
    return _segmented_values(lo, hi, TABLE_KIND_DIVISOR)


def two_squares_values_range(lo: int, hi: int) -> np.ndarray:
    """r(n) for n in [lo, hi), computed segment-wise."""
    return _segmented_values(lo, hi, TABLE_KIND_TWO_SQUARES)
