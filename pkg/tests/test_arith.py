"""Sieves, exact counting sums, error terms, and the cache layer."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from errorlab import arith
from errorlab.errors import UsageError


def test_divisor_table_spot_values():
    d = arith.divisor_table(1000, use_cache=False)
    assert d[1] == 1 and d[6] == 4 and d[12] == 6 and d[100] == 9


def test_two_squares_table_spot_values():
    r = arith.two_squares_table(1000, use_cache=False)
    # r(n) counts all signed lattice points on x^2 + y^2 = n
    assert r[1] == 4 and r[2] == 4 and r[3] == 0 and r[5] == 8 and r[25] == 12


def test_summatory_divisor_examples():
    assert arith.summatory_divisor(10) == 27
    assert arith.summatory_divisor(100) == 482
    assert arith.summatory_divisor(1) == 1


def test_lattice_count_examples():
    assert arith.lattice_count(0) == 1
    assert arith.lattice_count(1) == 5
    assert arith.lattice_count(2) == 9
    assert arith.lattice_count(2.5) == 9
    assert arith.lattice_count(3.9) == 9
    assert arith.lattice_count(4.0) == 13


def test_summatory_against_cumulative_sieve():
    lim = 10**4
    cum = np.cumsum(arith.divisor_table(lim, use_cache=False)[: lim + 1])
    for x in (1, 2, 10, 100, 999, 5000, 10000):
        assert arith.summatory_divisor(x) == int(cum[x])


def test_lattice_against_cumulative_sieve():
    lim = 10**4
    cum = np.cumsum(arith.two_squares_table(lim, use_cache=False)[: lim + 1])
    for x in (0, 1, 2, 5, 100, 9999, 10000):
        assert arith.lattice_count(x) - 1 == int(cum[x])


@given(st.integers(1, 200000))
@settings(max_examples=30)
def test_summatory_block_path_consistency(x):
    # the hyperbola method must agree with a direct per-n tally
    direct = sum((x // n) for n in range(1, int(math.isqrt(x)) + 1))
    s = int(math.isqrt(x))
    expect = 2 * direct - s * s
    assert arith.summatory_divisor(x) == expect


def test_ranges_match_tables():
    seg = arith.divisor_values_range(500, 1500)
    tab = arith.divisor_table(1500, use_cache=False)[500:1500].astype(np.int64)
    assert np.array_equal(seg, tab)
    segr = arith.two_squares_values_range(500, 1500)
    tabr = arith.two_squares_table(1500, use_cache=False)[500:1500].astype(np.int64)
    assert np.array_equal(segr, tabr)


def test_delta_example():
    v = arith.delta(10)
    assert v.counting == 27
    assert v.remainder == pytest.approx(2.4298, abs=1e-4)
    with pytest.raises(UsageError):
        arith.delta(0.5)


def test_p_error_examples():
    # N(1) = 5 lattice points, so P(1) = 5 - 1 - pi = 4 - pi
    assert arith.p_error(1).remainder == pytest.approx(4 - math.pi, abs=1e-12)
    # below the first lattice shell the remainder is -pi x exactly, minus N-1=0
    assert arith.p_error(0.5).remainder == pytest.approx(-math.pi / 2, abs=1e-12)


def test_error_term_dispatch():
    assert arith.error_term("divisor", 10).remainder == arith.delta(10).remainder
    assert arith.error_term("circle", 10).remainder == arith.p_error(10).remainder
    with pytest.raises(UsageError):
        arith.error_term("zeta2", 10)


def test_bulk_matches_scalar():
    ts = np.array([10.0, 123.4, 5000.0, 99999.5])
    bulk = arith.delta_bulk(ts)
    for t, v in zip(ts, bulk):
        assert v == pytest.approx(arith.delta(float(t)).remainder, abs=1e-9)
    bulkp = arith.p_error_bulk(ts)
    for t, v in zip(ts, bulkp):
        assert v == pytest.approx(arith.p_error(float(t)).remainder, abs=1e-9)


@given(st.integers(1, 10**9))
def test_squarefree_decompose_reconstructs(n):
    dec = arith.squarefree_decompose(n)
    assert dec.kernel * dec.cofactor**2 == n
    # kernel is squarefree
    for p, e in arith.factorize(dec.kernel):
        assert e == 1


def test_squarefree_decompose_examples():
    assert (arith.squarefree_decompose(1).kernel, arith.squarefree_decompose(1).cofactor) == (1, 1)
    assert (arith.squarefree_decompose(12).kernel, arith.squarefree_decompose(12).cofactor) == (3, 2)
    assert (arith.squarefree_decompose(50).kernel, arith.squarefree_decompose(50).cofactor) == (2, 5)


@given(st.integers(2, 10**12))
@settings(max_examples=40)
def test_factorize_reconstructs(n):
    parts = arith.factorize(n)
    prod = 1
    for p, e in parts:
        prod *= p**e
    assert prod == n
    assert parts == sorted(parts)


def test_divisor_count_matches_sieve():
    d = arith.divisor_table(500, use_cache=False)
    for n in range(1, 500):
        assert arith.divisor_count(n) == d[n]


def test_two_squares_count_matches_sieve():
    r = arith.two_squares_table(500, use_cache=False)
    for n in range(1, 500):
        assert arith.two_squares_count(n) == r[n]


def test_normalized_remainder():
    t = 12345.6
    assert arith.normalized_remainder("divisor", t) == pytest.approx(
        arith.delta(t).remainder / t**0.25, rel=1e-12)


# ------------------------------------------------------------------- cache


def test_cache_build_status_clear(tmp_path, monkeypatch):
    monkeypatch.setenv(arith.CACHE_ENV_VAR, str(tmp_path))
    assert arith.cache_status() == []
    entries = arith.cache_build(1000)
    assert {e["kind"] for e in entries} == {"divisor", "two-squares"}
    assert all(e["limit"] == 1000 for e in entries)
    status = arith.cache_status()
    assert len(status) == 2
    # deterministic sieves: rebuilding reproduces byte-identical files
    blobs = {e["path"]: open(e["path"], "rb").read() for e in status}
    arith.cache_clear()
    assert arith.cache_status() == []
    arith.cache_build(1000)
    for path, blob in blobs.items():
        assert open(path, "rb").read() == blob


def test_cache_file_roundtrip(tmp_path):
    values = arith.divisor_table(300, use_cache=False)
    path = tmp_path / "t.etlb"
    arith.write_table_file(path, 0, 300, values)
    raw = path.read_bytes()
    assert raw[:4] == b"ETLB"
    kind, limit, back = arith.read_table_file(path)
    assert (kind, limit) == (0, 300)
    assert np.array_equal(back, values)


def test_cache_file_corruption_detected(tmp_path):
    values = arith.divisor_table(100, use_cache=False)
    path = tmp_path / "t.etlb"
    arith.write_table_file(path, 0, 100, values)
    raw = path.read_bytes()
    path.write_bytes(raw[:-4])  # truncated payload
    with pytest.raises(UsageError):
        arith.read_table_file(path)
    path.write_bytes(b"XXXX" + raw[4:])  # bad magic
    with pytest.raises(UsageError):
        arith.read_table_file(path)


def test_cached_tables_hit_disk(tmp_path, monkeypatch):
    monkeypatch.setenv(arith.CACHE_ENV_VAR, str(tmp_path))
    a = arith.divisor_table(2000)
    assert any(e["kind"] == "divisor" for e in arith.cache_status())
    b = arith.divisor_table(2000)
    assert np.array_equal(a, b)
