import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from halasz_lab.errors import InvalidArgumentError, OutOfRangeError
from halasz_lab.primes import (PrimeTable, chebyshev_R, chebyshev_theta, load_spf_cache, prime_recip_sum, sieve,
                               small_primes, write_spf_cache)


def trial_division_primes(n):
    return [p for p in range(2, n + 1) if all(p % d for d in range(2, math.isqrt(p) + 1))]


def test_small_limits():
    assert sieve(10).primes.tolist() == [2, 3, 5, 7]
    assert sieve(2).primes.tolist() == [2]
    assert len(sieve(100)) == 25
    assert sieve(1000).primes.tolist() == trial_division_primes(1000)


def test_bad_limit():
    with pytest.raises(InvalidArgumentError):
        sieve(1)
    with pytest.raises(InvalidArgumentError):
        sieve(2**32)


def test_table_invariants(small_table):
    t = small_table
    spf = t.spf.astype(np.int64)
    n = np.arange(2, t.limit + 1)
    s = spf[2:]
    assert np.all(n % s == 0)
    assert np.all((s * s <= n) | (s == n))
    assert np.all(spf[t.primes] == t.primes)
    assert np.all(np.diff(t.primes) > 0)
    fixed = np.flatnonzero(spf[2:] == n) + 2
    assert np.array_equal(t.primes, fixed)


@given(st.integers(2, 200_000))
@settings(max_examples=200, deadline=None)
def test_factorization_reproduces_n(small_table, n):
    prod = 1
    for p, e in small_table.factorize(n):
        assert small_table.spf[p] == p
        prod *= p ** e
    assert prod == n


@given(st.integers(3, 5000), st.integers(1, 700))
@settings(max_examples=30, deadline=None)
def test_segment_size_does_not_matter(limit, seg):
    a, b = sieve(limit), sieve(limit, segment_size=seg)
    assert np.array_equal(a.spf, b.spf)
    assert np.array_equal(a.primes, b.primes)


def test_largest_prime_factor(small_table):
    lpf = small_table.largest_prime_factor
    for n in (2, 12, 97, 1001, 2 ** 10, 3 * 5 * 7 * 11, 199_999):
        assert lpf[n] == max(p for p, _ in small_table.factorize(n))
    assert lpf[1] in (0, 1)


def test_primes_in_half_open(small_table):
    assert small_table.primes_in(2, 11).tolist() == [3, 5, 7, 11]
    assert small_table.primes_in(1.5, 7).tolist() == [2, 3, 5, 7]
    assert small_table.primes_in(7, 7).size == 0
    assert small_table.pi(100) == 25


def test_prime_recip_sum(small_table):
    exact = math.fsum(1.0 / p for p in trial_division_primes(100))
    assert prime_recip_sum(small_table, 1.5, 100) == pytest.approx(1.80283, abs=1e-4)
    assert prime_recip_sum(small_table, 1.5, 100) == pytest.approx(exact, abs=1e-15)
    assert prime_recip_sum(small_table, 7, 7) == 0.0
    cos_t0 = prime_recip_sum(small_table, 1.5, 100, weight=np.cos, t=0.0)
    assert cos_t0 == pytest.approx(exact, abs=1e-15)
    with pytest.raises(OutOfRangeError):
        prime_recip_sum(small_table, 2, 10**7)


def test_mertens(small_table):
    # Mertens constant 0.2614972128...
    N = small_table.limit
    s = prime_recip_sum(small_table, 1.5, N)
    assert abs(s - math.log(math.log(N)) - 0.2615) < 0.05


def test_chebyshev(table_1e6):
    assert chebyshev_theta(table_1e6, 10) == pytest.approx(math.log(210), abs=1e-12)
    assert chebyshev_theta(table_1e6, 10) == pytest.approx(5.34711, abs=1e-5)
    assert chebyshev_theta(table_1e6, 2) == pytest.approx(math.log(2), abs=1e-15)
    assert abs(chebyshev_R(table_1e6, 1e6)) < 0.01


def test_small_primes_agrees():
    assert small_primes(500).tolist() == trial_division_primes(500)


def test_cache_roundtrip(tmp_path):
    t = sieve(5000)
    path = tmp_path / "spf.bin"
    write_spf_cache(t, path)
    raw = path.read_bytes()
    assert raw[:4] == b"SPF1"
    assert int.from_bytes(raw[4:12], "little") == 5000
    assert len(raw) == 12 + 4 * 5001
    back = load_spf_cache(path)
    assert np.array_equal(back.spf, t.spf) and np.array_equal(back.primes, t.primes)
    small = load_spf_cache(path, 1000)
    assert small.limit == 1000 and small.primes.tolist() == trial_division_primes(1000)
    assert load_spf_cache(path, 6000) is None
    # sieve() reads through the cache
    again = sieve(3000, cache=path)
    assert again.limit == 3000
    (tmp_path / "bad.bin").write_bytes(b"XXXX" + bytes(8))
    with pytest.raises(InvalidArgumentError):
        load_spf_cache(tmp_path / "bad.bin")
