import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import expi

from cmcensus.sieve import (
    LI2,
    factorize,
    is_prime64,
    is_squarefree,
    li,
    pollard_brent,
    prime_array,
    prime_count,
    primes_in,
    small_primes,
)


def trial_prime(n):
    return n >= 2 and all(n % d for d in range(2, math.isqrt(n) + 1))


@given(st.integers(0, 20000), st.integers(1, 3000), st.integers(1, 700))
def test_segments_match_trial_division(lo, width, seg):
    hi = lo + width
    got = np.concatenate([s.primes for s in primes_in(lo, hi, seg)]).tolist()
    assert got == [n for n in range(lo + 1, hi + 1) if trial_prime(n)]


def test_segments_cover_and_order():
    segs = list(primes_in(10**6, 10**6 + 5000, 1000))
    assert [s.lo for s in segs] == list(range(10**6, 10**6 + 5000, 1000))
    assert segs[-1].hi == 10**6 + 5000


@pytest.mark.parametrize("x,count", [(10, 4), (100, 25), (10**4, 1229), (10**6, 78498), (10**7, 664579)])
def test_prime_count(x, count):
    assert prime_count(x) == count


def test_bad_intervals():
    with pytest.raises(ValueError):
        next(primes_in(10, 10))
    with pytest.raises(ValueError):
        next(primes_in(-1, 10))


def test_is_prime64_small_range():
    flags = np.zeros(20001, bool)
    flags[small_primes(20000)] = True
    assert all(is_prime64(n) == flags[n] for n in range(20001))


@pytest.mark.parametrize(
    "n,expected",
    [
        (2**61 - 1, True),
        (18446744073709551557, True),  # largest prime below 2^64
        (3215031751, False),  # strong pseudoprime to bases 2, 3, 5, 7
        (3825123056546413051, False),
        (318665857834031151167461, False),
        (2**64 - 59 - 2, False),
    ],
)
def test_is_prime64_hard_cases(n, expected):
    assert is_prime64(n) is expected


@settings(max_examples=60)
@given(st.integers(1, 10**18))
def test_factorize_reconstructs(n):
    f = factorize(n)
    assert math.prod(p**e for p, e in f.items()) == n
    assert all(is_prime64(p) for p in f)


def test_pollard_on_semiprime():
    p, q = 1000003, 998244353
    assert pollard_brent(p * q) in (p, q)


@given(st.integers(1, 10**7))
def test_squarefree_against_factorization(n):
    assert is_squarefree(n) == all(e == 1 for e in factorize(n).values())


@pytest.mark.parametrize("n", [4, 9, 25 * 3, 1000003**2, 999983**2 * 7, 2 * 3 * 5 * 1000003 * 999983])
def test_squarefree_edge_cases(n):
    assert is_squarefree(n) == all(e == 1 for e in factorize(n).values())


@pytest.mark.parametrize("x", [2.5, 10, 1e3, 1e5, 1e6, 1e8, 1e10, 3e10, 1e12, 1e15])
def test_li_against_exponential_integral(x):
    ref = expi(math.log(x)) - expi(math.log(2.0))
    assert li(x) == pytest.approx(ref, rel=1e-12, abs=1e-12)


def test_li_constant_and_domain():
    assert expi(math.log(2.0)) == pytest.approx(LI2, rel=1e-15)
    assert li(2) == 0.0
    with pytest.raises(ValueError):
        li(1.5)
