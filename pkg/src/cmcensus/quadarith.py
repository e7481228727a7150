"""Exact arithmetic in the nine imaginary quadratic fields of class number one.

Elements of the ring of integers are stored as ``a + b*omega`` where ``omega``
is ``sqrt(disc/4)`` when ``disc = 0 mod 4`` and ``(1 + sqrt(disc))/2`` when
``disc = 1 mod 4``.  In both cases omega satisfies ``w^2 = s*w - n`` with
``(s, n) = (0, -disc/4)`` or ``(1, (1 - disc)/4)``, which is all the
multiplication code needs to know.

Coefficients are plain Python ints, so nothing here can overflow.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cache
from math import gcd, isqrt

HEEGNER_DISCS = (-3, -4, -7, -8, -11, -19, -43, -67, -163)


class NoRepresentation(ValueError):
    """Raised when a rational prime has no element of norm p (it is inert)."""


class SplittingType(enum.Enum):
    SPLIT = "S"
    INERT = "I"
    RAMIFIED = "R"


@dataclass(frozen=True)
class QuadField:
    disc: int

    def __post_init__(self):
        if self.disc not in HEEGNER_DISCS:
            raise ValueError(f"{self.disc} is not a class-number-one imaginary quadratic discriminant")

    @property
    def omega_trace(self) -> int:
        return self.disc % 4

    @property
    def omega_norm(self) -> int:
        return -self.disc // 4 if self.disc % 4 == 0 else (1 - self.disc) // 4

    @property
    def unit_count(self) -> int:
        return {-3: 6, -4: 4}.get(self.disc, 2)

    def __call__(self, a: int, b: int = 0) -> QInt:
        return QInt(self, int(a), int(b))

    def __repr__(self):
        return f"QuadField({self.disc})"


@dataclass(frozen=True)
class QInt:
    """An element ``a + b*omega`` of the maximal order of ``K``."""

    K: QuadField
    a: int
    b: int

    def _same(self, other) -> QInt:
        if isinstance(other, int):
            return QInt(self.K, other, 0)
        if not isinstance(other, QInt) or other.K != self.K:
            raise TypeError(f"cannot combine {self!r} with {other!r}")
        return other

    def __add__(self, other):
        o = self._same(other)
        return QInt(self.K, self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._same(other)
        return QInt(self.K, self.a - o.a, self.b - o.b)

    def __rsub__(self, other):
        return self._same(other) - self

    def __neg__(self):
        return QInt(self.K, -self.a, -self.b)

    def __mul__(self, other):
        o = self._same(other)
        s, n = self.K.omega_trace, self.K.omega_norm
        bd = self.b * o.b
        return QInt(self.K, self.a * o.a - n * bd, self.a * o.b + self.b * o.a + s * bd)

    __rmul__ = __mul__

    def __bool__(self):
        return bool(self.a or self.b)

    @property
    def coeffs(self) -> tuple[int, int]:
        return self.a, self.b

    def __repr__(self):
        return f"QInt({self.a}{self.b:+d}w; disc={self.K.disc})"


def norm(q: QInt) -> int:
    s, n = q.K.omega_trace, q.K.omega_norm
    return q.a * q.a + s * q.a * q.b + n * q.b * q.b


def trace(q: QInt) -> int:
    return 2 * q.a + q.K.omega_trace * q.b


def conj(q: QInt) -> QInt:
    return QInt(q.K, q.a + q.K.omega_trace * q.b, -q.b)


@cache
def units(K: QuadField) -> tuple[QInt, ...]:
    """All roots of unity of ``O_K``, found as the elements of norm 1."""
    # norm >= (3/4) b^2 * |disc|/4 ... a tiny box always suffices
    out = [K(a, b) for a in range(-2, 3) for b in range(-2, 3) if norm(K(a, b)) == 1]
    assert len(out) == K.unit_count
    return tuple(sorted(out, key=lambda u: (u.a, u.b)))


def kronecker(d: int, p: int) -> int:
    """Kronecker symbol ``(d | p)`` for a prime ``p``."""
    if p == 2:
        if d % 2 == 0:
            return 0
        return 1 if d % 8 in (1, 7) else -1
    r = pow(d % p, (p - 1) // 2, p)
    return -1 if r == p - 1 else r


def _is_prime_small(n: int) -> bool:
    from .sieve import is_prime64

    return is_prime64(n)


def splitting_type(K: QuadField, p: int) -> SplittingType:
    if not _is_prime_small(p):
        raise ValueError(f"{p} is not prime")
    k = kronecker(K.disc, p)
    if k == 0:
        return SplittingType.RAMIFIED
    return SplittingType.SPLIT if k == 1 else SplittingType.INERT


def orbit(q: QInt) -> list[QInt]:
    """Unit multiples of ``q`` and of its conjugate."""
    us = units(q.K)
    return [u * r for r in (q, conj(q)) for u in us]


def canonical_key(q: QInt) -> tuple:
    # prefer a > 0, then b >= 0, then lexicographically least (a, b)
    return (q.a <= 0, q.b < 0, q.a, q.b)


def canonical(q: QInt, *, conjugates: bool = True) -> QInt:
    """Deterministic representative of the unit (and optionally conjugate) orbit of ``q``."""
    cands = orbit(q) if conjugates else [u * q for u in units(q.K)]
    return min(cands, key=canonical_key)


def sqrt_mod_prime(n: int, p: int) -> int | None:
    """A square root of ``n`` modulo the prime ``p`` (Tonelli-Shanks), or None."""
    n %= p
    if n == 0 or p == 2:
        return n
    if pow(n, (p - 1) // 2, p) != 1:
        return None
    if p % 4 == 3:
        return pow(n, (p + 1) // 4, p)
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while pow(z, (p - 1) // 2, p) != p - 1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(n, q, p), pow(n, (q + 1) // 2, p)
    while t != 1:
        i, t2 = 1, t * t % p
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        r, c = r * b % p, b * b % p
        t = t * c % p
        m = i
    return r


def cornacchia_search(K: QuadField, p: int) -> QInt:
    """Exhaustive search for an element of norm ``p``; the test oracle."""
    n = K.omega_norm
    s = K.omega_trace
    # 4*norm = (2a + s b)^2 + |disc| b^2, so |b| <= 2 sqrt(p/|disc|)
    bmax = isqrt(4 * p // -K.disc) + 1
    for b in range(0, bmax + 1):
        # solve a^2 + s b a + (n b^2 - p) = 0
        disc = s * s * b * b - 4 * (n * b * b - p)
        if disc < 0:
            continue
        r = isqrt(disc)
        if r * r != disc:
            continue
        for num in (-s * b + r, -s * b - r):
            if num % 2 == 0:
                q = K(num // 2, b)
                if norm(q) == p:
                    return canonical(q)
    raise NoRepresentation(f"{p} is inert in Q(sqrt({K.disc}))")


def cornacchia(K: QuadField, p: int) -> QInt:
    """Canonical generator of a prime of ``K`` above the split or ramified prime ``p``.

    Solves ``X^2 + |disc| Y^2 = 4p`` by Euclidean descent from a square root of
    ``disc`` modulo ``4p``; small or ramified ``p`` go through the exhaustive search.
    """
    D = K.disc
    if p < 4 * -D or D % p == 0:
        return cornacchia_search(K, p)
    x0 = sqrt_mod_prime(D, p)
    if x0 is None:
        raise NoRepresentation(f"{p} is inert in Q(sqrt({D}))")
    if (x0 - D) % 2:
        x0 = p - x0
    a, b = 2 * p, x0
    limit = isqrt(4 * p)
    while b > limit:
        a, b = b, a % b
    c, r = divmod(4 * p - b * b, -D)
    y = isqrt(c)
    if r or y * y != c:
        raise NoRepresentation(f"descent failed for p={p}, disc={D}")
    # (b + y sqrt(D)) / 2 in the omega basis
    if D % 4 == 0:
        q = K(b // 2, y)
    else:
        q = K((b - y) // 2, y)
    return canonical(q)


def split_by_ramification(K: QuadField, m: int) -> tuple[int, int, int]:
    """Factor a squarefree ``m`` as (inert part, ramified part, split part)."""
    from .sieve import factorize

    parts = {SplittingType.INERT: 1, SplittingType.RAMIFIED: 1, SplittingType.SPLIT: 1}
    for ell, e in factorize(m).items():
        if e > 1:
            raise ValueError(f"{m} is not squarefree")
        parts[splitting_type(K, ell)] *= ell
    return parts[SplittingType.INERT], parts[SplittingType.RAMIFIED], parts[SplittingType.SPLIT]


def mod_reduce(q: QInt, m: int) -> QInt:
    if m < 1:
        raise ValueError("modulus must be positive")
    return QInt(q.K, q.a % m, q.b % m)


def is_unit_mod(q: QInt, m: int) -> bool:
    return gcd(norm(q), m) == 1


def divides(d: QInt, q: QInt) -> bool:
    """True iff ``q / d`` lies in ``O_K``."""
    if isinstance(q, int):
        q = d.K(q)
    if isinstance(d, int):
        d = q.K(d)
    nd = norm(d)
    if nd == 0:
        raise ValueError("division by zero")
    t = q * conj(d)
    return t.a % nd == 0 and t.b % nd == 0


def content(q: QInt) -> int:
    """Largest rational integer dividing ``q`` in ``O_K``."""
    return gcd(q.a, q.b)
