"""Prime supply: segmented sieve, 64-bit primality, factoring, square-freeness, li."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from math import gcd, isqrt
from typing import Iterator

import numpy as np

DEFAULT_SEGMENT = 1 << 20
MAX_SIEVE = 1 << 52

# bases that make Miller-Rabin deterministic below 2^64; the longer list is
# deterministic below 3.3e24 and a strong probable-prime test beyond that
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
_MR_BASES_BIG = _MR_BASES + (41, 43, 47, 53, 59, 61, 67, 71)


@dataclass
class Segment:
    lo: int
    hi: int
    primes: np.ndarray = field(repr=False)

    def __len__(self):
        return len(self.primes)


@lru_cache(maxsize=8)
def small_primes(limit: int) -> np.ndarray:
    """All primes ``<= limit`` as an int64 array (plain Eratosthenes)."""
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    flags[4::2] = False
    for q in range(3, isqrt(limit) + 1, 2):
        if flags[q]:
            flags[q * q :: 2 * q] = False
    return np.flatnonzero(flags).astype(np.int64)


def _sieve_chunk(a: int, b: int, base: np.ndarray) -> np.ndarray:
    """Primes in (a, b] using odd-only flags and the given base primes."""
    start = a + 1
    first_odd = start | 1
    out = []
    if start <= 2 <= b:
        out.append(np.array([2], dtype=np.int64))
    if first_odd > b:
        return out[0] if out else np.zeros(0, dtype=np.int64)
    n_odd = (b - first_odd) // 2 + 1
    flags = np.ones(n_odd, dtype=bool)
    for q in base[1:]:  # skip 2
        q = int(q)
        qq = q * q
        if qq > b:
            break
        m = max(qq, (start + q - 1) // q * q)
        if m % 2 == 0:
            m += q
        flags[(m - first_odd) // 2 :: q] = False
    if first_odd == 1:
        flags[0] = False
    out.append(first_odd + 2 * np.flatnonzero(flags).astype(np.int64))
    return np.concatenate(out)


def primes_in(lo: int, hi: int, segment_size: int = DEFAULT_SEGMENT) -> Iterator[Segment]:
    """Stream the primes of ``(lo, hi]`` in ascending segments of ``segment_size`` integers."""
    lo, hi = int(lo), int(hi)
    if hi <= lo:
        raise ValueError(f"empty interval ({lo}, {hi}]")
    if lo < 0 or hi > MAX_SIEVE:
        raise ValueError("interval must lie within [0, 2^52]")
    if segment_size < 1:
        raise ValueError("segment_size must be positive")
    base = small_primes(isqrt(hi) + 1)
    a = lo
    while a < hi:
        b = min(a + segment_size, hi)
        yield Segment(a, b, _sieve_chunk(a, b, base))
        a = b


def segment_bounds(lo: int, hi: int, segment_size: int = DEFAULT_SEGMENT) -> list[tuple[int, int]]:
    return [(a, min(a + segment_size, hi)) for a in range(lo, hi, segment_size)]


def prime_array(lo: int, hi: int) -> np.ndarray:
    """Primes of ``(lo, hi]`` as a single array."""
    if hi <= lo:
        return np.zeros(0, dtype=np.int64)
    return np.concatenate([s.primes for s in primes_in(lo, hi)])


def prime_count(x: int) -> int:
    return 0 if x < 2 else sum(len(s) for s in primes_in(1, x))


def is_prime64(n: int) -> bool:
    """Miller-Rabin, deterministic for n < 3.3e24."""
    n = int(n)
    if n < 2:
        return False
    bases = _MR_BASES if n < 1 << 64 else _MR_BASES_BIG
    for p in bases:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in bases:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def pollard_brent(n: int) -> int:
    """A nontrivial factor of the composite ``n`` (Brent's cycle variant).

    Seeds run through c = 1, 2, 3, ... so the result is reproducible.
    """
    if n % 2 == 0:
        return 2
    for c in range(1, 1000):
        y, m, g, r, q = 2, 128, 1, 1, 1
        x = ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = gcd(abs(x - ys), n)
        if g != n:
            return g
    raise ArithmeticError(f"Pollard rho failed on {n}")


def factorize(n: int) -> dict[int, int]:
    """Prime factorization of a positive integer as ``{prime: exponent}``."""
    n = int(n)
    if n < 1:
        raise ValueError("factorize needs n >= 1")
    out: dict[int, int] = {}
    for p in small_primes(1000):
        p = int(p)
        if p * p > n:
            break
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    stack = [n] if n > 1 else []
    while stack:
        m = stack.pop()
        if is_prime64(m):
            out[m] = out.get(m, 0) + 1
            continue
        r = isqrt(m)
        if r * r == m:
            stack += [r, r]
            continue
        d = pollard_brent(m)
        stack += [d, m // d]
    return dict(sorted(out.items()))


def _icbrt(n: int) -> int:
    r = int(round(n ** (1 / 3)))
    while r * r * r > n:
        r -= 1
    while (r + 1) ** 3 <= n:
        r += 1
    return r


def is_squarefree(n: int) -> bool:
    """True iff no prime square divides ``n``.

    Primes up to the cube root are stripped by trial division; what remains has
    at most two prime factors, so it is square-free unless it is a perfect square.
    """
    n = int(n)
    if n < 1:
        raise ValueError("is_squarefree needs n >= 1")
    if n % 4 == 0 or n % 9 == 0:
        return False
    bound = _icbrt(n)
    ps = small_primes(max(bound, 2))
    if n < (1 << 63):
        hits = ps[np.int64(n) % ps == 0] if len(ps) else ps
    else:
        hits = [p for p in ps if n % int(p) == 0]
    c = n
    for p in hits:
        p = int(p)
        c //= p
        if c % p == 0:
            return False
    if c == 1:
        return True
    r = isqrt(c)
    return r * r != c


def _li_gauss(x: float) -> float:
    nodes, weights = _gl_rule()
    total = 0.0
    a = 2.0
    while a < x:
        b = min(2.0 * a, x)
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        t = mid + half * nodes
        total += half * float(np.dot(weights, 1.0 / np.log(t)))
        a = b
    return total


@lru_cache(maxsize=1)
def _gl_rule():
    return np.polynomial.legendre.leggauss(40)


LI2 = 1.045163780117492784844588889194613136522615578151201575832909


def _li_series(x: float) -> float:
    """Ramanujan's series for the full li(x), minus li(2)."""
    L = math.log(x)
    total, term, inner = 0.0, 1.0, 0.0
    n = 1
    while True:
        term *= L / n  # L^n / n!
        if (n - 1) % 2 == 0:
            inner += 1.0 / n  # sum of 1/(2k+1), k <= (n-1)/2
        t = (-1) ** (n - 1) * term / 2 ** (n - 1) * inner
        total += t
        if n > 2 * L and abs(t) < 1e-18 * abs(total):
            break
        n += 1
    return 0.5772156649015329 + math.log(L) + math.sqrt(x) * total - LI2


def li(x: float) -> float:
    """Offset logarithmic integral: the integral of 1/log t over [2, x]."""
    x = float(x)
    if x < 2:
        raise ValueError("li is defined for x >= 2")
    if x > 1e10:
        return _li_series(x)
    return _li_gauss(x)
