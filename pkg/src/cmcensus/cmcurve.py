"""CM elliptic curves over Q and their reductions modulo primes.

Everything here is the pure-Python reference path: exact integer arithmetic,
no size limits.  The census hot loop uses the compiled twin in ``_kernels``,
which is tested against these functions.
"""
from __future__ import annotations

import zlib
from dataclasses import dataclass, field
from functools import cache, cached_property
from importlib import resources
from math import gcd, isqrt, lcm
from pathlib import Path

import numpy as np

from .quadarith import (
    QInt,
    QuadField,
    SplittingType,
    canonical_key,
    cornacchia,
    divides,
    norm,
    orbit,
    splitting_type,
    trace,
)
from .sieve import factorize, is_prime64, prime_array

NAIVE_FALLBACK = 1000
ORACLE_LIMIT = 3000
NAIVE_LIMIT = 10**6
FROB_SAMPLES = 32


class BadPrimeError(ValueError):
    pass


class SupersingularInput(ValueError):
    pass


class CMValidationError(ValueError):
    def __init__(self, curve_id: str, p: int, reason: str):
        super().__init__(f"curve {curve_id} fails CM validation at p={p}: {reason}")
        self.curve_id = curve_id
        self.p = p


class RegistryError(ValueError):
    pass


@dataclass(frozen=True)
class CMCurve:
    id: str
    a1: int
    a2: int
    a3: int
    a4: int
    a6: int
    K: QuadField
    conductor: int
    bad_modulus: int = field(default=0)

    def __post_init__(self):
        if self.bad_modulus == 0:
            object.__setattr__(self, "bad_modulus", lcm(6, self.conductor))
        if self.discriminant == 0:
            raise ValueError(f"curve {self.id} is singular")

    @property
    def ainvs(self) -> tuple[int, ...]:
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    @cached_property
    def b_invariants(self) -> tuple[int, int, int, int]:
        a1, a2, a3, a4, a6 = self.ainvs
        b2 = a1 * a1 + 4 * a2
        b4 = 2 * a4 + a1 * a3
        b6 = a3 * a3 + 4 * a6
        b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
        return b2, b4, b6, b8

    @cached_property
    def c4(self) -> int:
        b2, b4, _, _ = self.b_invariants
        return b2 * b2 - 24 * b4

    @cached_property
    def c6(self) -> int:
        b2, b4, b6, _ = self.b_invariants
        return -(b2**3) + 36 * b2 * b4 - 216 * b6

    @cached_property
    def discriminant(self) -> int:
        b2, b4, b6, b8 = self.b_invariants
        return -b2 * b2 * b8 - 8 * b4**3 - 27 * b6 * b6 + 9 * b2 * b4 * b6

    @property
    def short_model(self) -> tuple[int, int]:
        """(A, B) with y^2 = x^3 + A x + B isomorphic to the curve over F_p, p >= 5."""
        return -27 * self.c4, -54 * self.c6

    def is_good(self, p: int) -> bool:
        return self.conductor % p != 0

    def __str__(self):
        return f"{self.id} [{self.a1},{self.a2},{self.a3},{self.a4},{self.a6}] N={self.conductor}"


@dataclass(frozen=True)
class PrimeRecord:
    p: int
    split: SplittingType
    a_p: int
    N_p: int
    pi: QInt | None
    squarefree: bool
    cyclic: bool

    @property
    def ordinary(self) -> bool:
        return self.a_p != 0


# ---------------------------------------------------------------- registry


def parse_registry(text: str) -> list[CMCurve]:
    curves = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 8:
            raise RegistryError(f"line {lineno}: expected 8 fields, got {len(parts)}")
        try:
            a1, a2, a3, a4, a6, disc, cond = map(int, parts[1:])
            curves.append(CMCurve(parts[0], a1, a2, a3, a4, a6, QuadField(disc), cond))
        except ValueError as exc:
            raise RegistryError(f"line {lineno} ({parts[0]}): {exc}") from exc
    return curves


def check_conductor(E: CMCurve) -> None:
    """Consistency checks available without Tate's algorithm."""
    bad = set(factorize(abs(E.discriminant)))
    cond = set(factorize(E.conductor))
    if bad != cond:
        raise RegistryError(f"{E.id}: primes of conductor {sorted(cond)} != primes of discriminant {sorted(bad)}")
    if E.conductor % -E.K.disc:
        raise RegistryError(f"{E.id}: |disc K| = {-E.K.disc} does not divide N_E = {E.conductor}")


def load_registry(source: str | Path | None = None, bound: int = 10**4) -> list[CMCurve]:
    if source is None:
        text = resources.files("cmcensus").joinpath("data/registry.txt").read_text()
    else:
        text = Path(source).read_text()
    curves = parse_registry(text)
    for E in curves:
        try:
            check_conductor(E)
            validate_cm(E, bound)
        except CMValidationError as exc:
            raise RegistryError(f"registry entry {E.id} rejected: {exc}") from exc
    return curves


@cache
def registry() -> tuple[CMCurve, ...]:
    return tuple(load_registry())


def get_curve(key: str | int) -> CMCurve:
    """Registry lookup by id (``"cm-11"``) or by field discriminant (``-11``)."""
    for E in registry():
        if E.id == key or E.K.disc == key or str(E.K.disc) == str(key):
            return E
    raise KeyError(f"unknown curve {key!r}")


# ---------------------------------------------------------------- point counts


def point_count_naive(E: CMCurve, p: int) -> int:
    """|E(F_p)| by running over x and counting square roots."""
    if not E.is_good(p):
        raise BadPrimeError(f"p={p} divides N_E={E.conductor}")
    if p > NAIVE_LIMIT:
        raise ValueError(f"p={p} is beyond the enumeration limit")
    if p == 2:
        return 1 + sum(1 for x in range(2) for y in range(2) if _on_curve(E, x, y, 2))
    b2, b4, b6, _ = (b % p for b in E.b_invariants)
    # (2y + a1 x + a3)^2 = 4x^3 + b2 x^2 + 2 b4 x + b6
    x = np.arange(p, dtype=np.int64)
    f = (4 * x + b2) % p
    f = (f * x + 2 * b4) % p
    f = (f * x + b6) % p
    isq = np.zeros(p, dtype=bool)
    isq[(x * x) % p] = True
    zero = f == 0
    return 1 + int(zero.sum()) + 2 * int((isq[f] & ~zero).sum())


def _on_curve(E: CMCurve, x: int, y: int, p: int) -> bool:
    a1, a2, a3, a4, a6 = E.ainvs
    return (y * y + a1 * x * y + a3 * y - (x**3 + a2 * x * x + a4 * x + a6)) % p == 0


def points(E: CMCurve, p: int) -> list[tuple[int, int]]:
    """All affine points of E(F_p); the point at infinity is ``None`` elsewhere."""
    a1, a2, a3, a4, a6 = (a % p for a in E.ainvs)
    if p == 2:
        return [(x, y) for x in range(2) for y in range(2) if _on_curve(E, x, y, 2)]
    roots: dict[int, list[int]] = {}
    for w in range(p):
        roots.setdefault(w * w % p, []).append(w)
    b2, b4, b6, _ = (b % p for b in E.b_invariants)
    inv2 = (p + 1) // 2
    out = []
    for x in range(p):
        f = (4 * x**3 + b2 * x * x + 2 * b4 * x + b6) % p
        for w in roots.get(f, ()):
            out.append((x, (w - a1 * x - a3) * inv2 % p))
    return out


def ec_add(E: CMCurve, P, Q, p: int):
    """Affine group law on the long Weierstrass model over F_p; ``None`` is O."""
    if P is None:
        return Q
    if Q is None:
        return P
    a1, a2, a3, a4, a6 = E.ainvs
    x1, y1 = P
    x2, y2 = Q
    if (x1 - x2) % p == 0:
        if (y1 + y2 + a1 * x2 + a3) % p == 0:
            return None
        den = (2 * y1 + a1 * x1 + a3) % p
        inv = pow(den, -1, p)
        lam = (3 * x1 * x1 + 2 * a2 * x1 + a4 - a1 * y1) * inv % p
        nu = (-(x1**3) + a4 * x1 + 2 * a6 - a3 * y1) * inv % p
    else:
        inv = pow(x2 - x1, -1, p)
        lam = (y2 - y1) * inv % p
        nu = (y1 * x2 - y2 * x1) * inv % p
    x3 = (lam * lam + a1 * lam - a2 - x1 - x2) % p
    y3 = (-(lam + a1) * x3 - nu - a3) % p
    return (x3, y3)


def ec_mul(E: CMCurve, n: int, P, p: int):
    R = None
    while n:
        if n & 1:
            R = ec_add(E, R, P, p)
        P = ec_add(E, P, P, p)
        n >>= 1
    return R


def group_structure_oracle(E: CMCurve, p: int) -> tuple[int, int]:
    """Invariant factors (n1, n2), n1 | n2, of E(F_p) by full enumeration.

    For each prime q with q^2 | N and q | p - 1 the size of E[q^k](F_p) is
    counted directly; n1 is the product of the q^k for which it equals q^(2k).
    """
    if not E.is_good(p):
        raise BadPrimeError(f"p={p} divides N_E={E.conductor}")
    if p > ORACLE_LIMIT:
        raise ValueError(f"p={p} exceeds the enumeration oracle limit {ORACLE_LIMIT}")
    pts = points(E, p)
    N = len(pts) + 1
    n1 = 1
    for q in factorize(gcd(N, p - 1)):
        if N % (q * q):
            continue
        images = {P: ec_mul(E, q, P, p) for P in pts}
        images[None] = None
        level = [P for P in pts]
        k = 0
        while True:
            level = [images[P] for P in level]
            killed = sum(1 for P in level if P is None) + 1
            if killed != q ** (2 * (k + 1)):
                break
            k += 1
            if N % q ** (2 * (k + 1)) or (p - 1) % q ** (k + 1):
                break
        n1 *= q**k
    assert N % (n1 * n1) == 0
    return n1, N // n1


# ---------------------------------------------------------------- Frobenius


def _splitmix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
    return z ^ (z >> 31)


def curve_seed(E: CMCurve, salt: int = 0) -> int:
    return (zlib.crc32(E.id.encode()) << 32 ^ salt) & 0xFFFFFFFFFFFFFFFF


def sample_stream(seed: int, p: int):
    """Deterministic pseudo-random residues mod p for the pair (curve, p)."""
    state = (seed ^ (p * 0x9E3779B97F4A7C15)) & 0xFFFFFFFFFFFFFFFF
    while True:
        state = _splitmix64(state)
        yield state % p


def xladder(x0: int, n: int, A: int, B: int, p: int) -> tuple[int, int]:
    """Projective x-coordinate (X : Z) of [n]P on y^2 = x^3 + A x + B, where x(P) = x0 != 0.

    Works for points of the quadratic twist too, since only x is used.
    Z == 0 exactly when [n]P is the point at infinity.
    """
    b4 = 4 * B % p
    X0, Z0 = 1, 0
    X1, Z1 = x0 % p, 1
    for bit in bin(n)[2:]:
        # differential addition, difference P = (x0 : 1)
        t = X0 * Z1 % p
        u = X1 * Z0 % p
        zz = Z0 * Z1 % p
        v = (X0 * X1 - A * zz) % p
        XA = (v * v - b4 * zz % p * (t + u)) % p
        ZA = x0 * (t - u) % p * (t - u) % p
        if bit == "1":
            X0, Z0 = XA, ZA
            X1, Z1 = _xdbl(X1, Z1, A, B, p)
        else:
            X1, Z1 = XA, ZA
            X0, Z0 = _xdbl(X0, Z0, A, B, p)
    return X0, Z0


def _xdbl(X: int, Z: int, A: int, B: int, p: int) -> tuple[int, int]:
    XX, ZZ = X * X % p, Z * Z % p
    w = (XX - A * ZZ) % p
    Xr = (w * w - 8 * B * X % p * ZZ % p * Z) % p
    Zr = 4 * Z * (X * XX + A * X * ZZ + B * ZZ * Z) % p
    return Xr, Zr


def _naive_frobenius(E: CMCurve, p: int, cands: list[QInt] | None) -> tuple[QInt | None, int]:
    a_p = p + 1 - point_count_naive(E, p)
    if cands is None:
        return None, a_p
    match = [c for c in cands if trace(c) == a_p]
    if not match:
        raise CMValidationError(E.id, p, f"a_p={a_p} is not the trace of an element of norm p")
    return min(match, key=canonical_key), a_p


def frobenius(E: CMCurve, p: int, seed_salt: int = 0) -> tuple[QInt, int]:
    """Frobenius element and trace at an ordinary prime.

    Cornacchia gives the prime above p up to units and conjugation; the trace
    candidates are separated by checking which group order kills sampled
    points (points of the quadratic twist test p + 1 + t instead).
    """
    if not E.is_good(p):
        raise BadPrimeError(f"p={p} divides N_E={E.conductor}")
    st = splitting_type(E.K, p)
    if st is not SplittingType.SPLIT:
        raise SupersingularInput(f"p={p} is {st.name.lower()} in Q(sqrt({E.K.disc}))")
    cands = orbit(cornacchia(E.K, p))
    if p < NAIVE_FALLBACK or p <= 3:
        return _naive_frobenius(E, p, cands)
    traces = sorted({trace(c) for c in cands})
    A, B = (c % p for c in E.short_model)
    samples = sample_stream(curve_seed(E, seed_salt), p)
    for _ in range(FROB_SAMPLES):
        if len(traces) == 1:
            break
        x = next(samples)
        rhs = (x * x * x + A * x + B) % p
        if x == 0 or rhs == 0:
            continue
        sign = 1 if pow(rhs, (p - 1) // 2, p) == 1 else -1
        traces = [t for t in traces if xladder(x, p + 1 - sign * t, A, B, p)[1] == 0]
    if len(traces) != 1:
        return _naive_frobenius(E, p, cands)
    a_p = traces[0]
    pi = min((c for c in cands if trace(c) == a_p), key=canonical_key)
    return pi, a_p


def trace_of_frobenius(E: CMCurve, p: int) -> int:
    """a_p at any good prime (0 at supersingular p >= 5)."""
    if p < NAIVE_FALLBACK:
        return p + 1 - point_count_naive(E, p)
    if splitting_type(E.K, p) is not SplittingType.SPLIT:
        if not E.is_good(p):
            raise BadPrimeError(f"p={p} divides N_E={E.conductor}")
        return 0
    return frobenius(E, p)[1]


# ---------------------------------------------------------------- torsion tests


def _polmulmod(f, g, A, B, p):
    # product of two residues c0 + c1 x + c2 x^2 modulo x^3 + A x + B
    r = [0] * 5
    for i in range(3):
        for j in range(3):
            r[i + j] += f[i] * g[j]
    for k in (4, 3):
        c = r[k] % p
        r[k] = 0
        r[k - 2] -= c * A
        r[k - 3] -= c * B
    return [r[0] % p, r[1] % p, r[2] % p]


def two_division_splits(E: CMCurve, p: int) -> bool:
    """True iff x^3 + A x + B splits into linear factors mod p (full rational 2-torsion)."""
    if p <= 3:
        return group_structure_oracle(E, p)[0] % 2 == 0
    A, B = (c % p for c in E.short_model)
    result, base, e = [1, 0, 0], [0, 1, 0], p
    while e:
        if e & 1:
            result = _polmulmod(result, base, A, B, p)
        base = _polmulmod(base, base, A, B, p)
        e >>= 1
    # squarefree cubic splits completely iff x^p = x mod f
    return result == [0, 1, 0]


def _sampled_full_torsion(E: CMCurve, p: int, q: int, N: int, seed_salt: int = 0) -> bool:
    """Decide whether the q-Sylow subgroup of E(F_p) is non-cyclic by sampling.

    Projects random points onto the q-part; finding one of order q^e (the full
    q-part of N) proves the subgroup cyclic.
    """
    e = 0
    m = N
    while m % q == 0:
        m //= q
        e += 1
    if e < 2:
        return False
    A, B = (c % p for c in E.short_model)
    samples = sample_stream(curve_seed(E, seed_salt) ^ q, p)
    hits = 0
    while hits < FROB_SAMPLES:
        x = next(samples)
        rhs = (x * x * x + A * x + B) % p
        if x == 0 or rhs == 0 or pow(rhs, (p - 1) // 2, p) != 1:
            continue
        hits += 1
        X, Z = xladder(x, m, A, B, p)
        if Z == 0:
            continue
        xr = X * pow(Z, -1, p) % p
        if xr == 0:
            continue
        if xladder(xr, q ** (e - 1), A, B, p)[1] != 0:
            return False
    return True


def has_full_q_torsion(E: CMCurve, p: int, pi: QInt | None, q: int, seed_salt: int = 0) -> bool:
    """Whether E[q] is contained in E(F_p), for a good prime p and a prime q."""
    if pi is not None and norm(pi) != p:
        raise ValueError(f"pi={pi} does not have norm {p}")
    if not E.is_good(p):
        raise BadPrimeError(f"p={p} divides N_E={E.conductor}")
    if p <= 3:
        return group_structure_oracle(E, p)[0] % q == 0
    if q == 2:
        return two_division_splits(E, p)
    if pi is not None and E.bad_modulus % q:
        return divides(pi.K(q), pi - 1)
    N = norm(pi - 1) if pi is not None else p + 1 - trace_of_frobenius(E, p)
    if N % (q * q) or (p - 1) % q:
        return False
    return _sampled_full_torsion(E, p, q, N, seed_salt)


def is_cyclic(E: CMCurve, p: int, seed_salt: int = 0) -> bool:
    if not E.is_good(p):
        raise BadPrimeError(f"p={p} divides N_E={E.conductor}")
    if p <= 3:
        return group_structure_oracle(E, p)[0] == 1
    return prime_record(E, p, seed_salt).cyclic


def _cyclic_from(E: CMCurve, p: int, pi: QInt | None, N: int, seed_salt: int) -> bool:
    g = gcd(N, p - 1)
    if g == 1:
        return True
    for q in factorize(g):
        if N % (q * q) == 0 and has_full_q_torsion(E, p, pi, q, seed_salt):
            return False
    return True


def d_membership(pi: QInt, m: int) -> bool:
    """Frobenius lies in D_{m^2}: m^2 divides N(pi - 1)."""
    return norm(pi - 1) % (m * m) == 0


def prime_record(E: CMCurve, p: int, seed_salt: int = 0) -> PrimeRecord:
    from .sieve import is_squarefree

    if not E.is_good(p):
        raise BadPrimeError(f"p={p} divides N_E={E.conductor}")
    st = splitting_type(E.K, p)
    if p <= 3:
        pi = None
        if st is SplittingType.SPLIT:
            pi, a_p = _naive_frobenius(E, p, orbit(cornacchia(E.K, p)))
        else:
            a_p = p + 1 - point_count_naive(E, p)
        N = p + 1 - a_p
        cyc = group_structure_oracle(E, p)[0] == 1
        return PrimeRecord(p, st, a_p, N, pi, a_p != 0 and is_squarefree(N), cyc)
    if st is SplittingType.SPLIT:
        pi, a_p = frobenius(E, p, seed_salt)
    else:
        pi, a_p = None, 0
    N = p + 1 - a_p
    sf = a_p != 0 and is_squarefree(N)
    return PrimeRecord(p, st, a_p, N, pi, sf, _cyclic_from(E, p, pi, N, seed_salt))


# ---------------------------------------------------------------- validation


@dataclass
class ValidationReport:
    curve_id: str
    bound: int
    primes_checked: int
    ordinary: int
    supersingular: int

    def __str__(self):
        return (
            f"{self.curve_id}: {self.primes_checked} good primes <= {self.bound} "
            f"({self.ordinary} ordinary, {self.supersingular} supersingular) ok"
        )


def validate_cm(E: CMCurve, bound: int = 10**4) -> ValidationReport:
    """Check Deuring's criterion and the CM norm equation against naive point counts."""
    if bound < 100:
        raise ValueError("validation bound must be at least 100")
    D = -E.K.disc
    n_ord = n_ss = 0
    for p in prime_array(4, min(bound, NAIVE_LIMIT)):
        p = int(p)
        if not E.is_good(p):
            continue
        a = p + 1 - point_count_naive(E, p)
        if abs(a) > 2 * isqrt(p) + 2 or a * a > 4 * p:
            raise CMValidationError(E.id, p, f"a_p={a} violates the Hasse bound")
        st = splitting_type(E.K, p)
        if (a == 0) != (st is not SplittingType.SPLIT):
            raise CMValidationError(E.id, p, f"a_p={a} but p is {st.name.lower()}")
        if a:
            c, r = divmod(4 * p - a * a, D)
            if r or isqrt(c) ** 2 != c:
                raise CMValidationError(E.id, p, f"4p - a_p^2 = {4 * p - a * a} is not {D} times a square")
            n_ord += 1
        else:
            n_ss += 1
    return ValidationReport(E.id, bound, n_ord + n_ss, n_ord, n_ss)
