"""Ray classes modulo principal ideals of a class-number-one imaginary quadratic field.

With h_K = 1 and no real places, the ray class of an ideal (alpha) coprime to
q is the orbit of alpha mod q under multiplication by the units.  Classes are
labelled by their lexicographically least residue (a, b), so labels are stable
across runs.

Residues mod q are indexed through the Hermite basis (c, 0), (e, f) of the
lattice q O_K in omega coordinates: (a, b) reduces to
((a - floor(b/f) e) mod c, b mod f), one of c f = N(q) cells.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cache, cached_property

import numpy as np

from . import _kernels as kern
from .quadarith import (
    QInt,
    QuadField,
    SplittingType,
    canonical,
    canonical_key,
    conj,
    cornacchia_search,
    divides,
    norm,
    splitting_type,
    units,
)
from .sieve import factorize, li, prime_array

CLASS_HEADER = "disc,q_norm,q_gen,T,h,class_id,count,expected,abs_err"
STAT_HEADER = "disc,x,h,Q,statistic"


class CoprimalityError(ValueError):
    pass


class InequalityViolation(AssertionError):
    pass


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


@dataclass(frozen=True)
class RayModulus:
    K: QuadField
    gen: QInt
    norm: int = field(init=False)

    def __post_init__(self):
        if not self.gen:
            raise ValueError("modulus generator must be nonzero")
        object.__setattr__(self, "gen", canonical(self.gen, conjugates=False))
        object.__setattr__(self, "norm", norm(self.gen))

    @classmethod
    def of(cls, K: QuadField, a: int, b: int = 0) -> RayModulus:
        return cls(K, K(a, b))

    @cached_property
    def hermite(self) -> tuple[int, int, int]:
        """(c, e, f) with q O_K spanned by (c, 0) and (e, f)."""
        g = self.gen
        v1, v2 = g.coeffs, (g * self.K(0, 1)).coeffs
        f, u, v = _xgcd(v1[1], v2[1])
        if f < 0:
            f, u, v = -f, -u, -v
        c = self.norm // f
        e = (u * v1[0] + v * v2[0]) % c
        return c, e, f

    def index(self, a, b):
        """Residue cell of a + b omega (ints or numpy arrays)."""
        c, e, f = self.hermite
        k = b // f
        return ((a - k * e) % c) * f + (b - k * f)

    def residue(self, i: int) -> tuple[int, int]:
        c, e, f = self.hermite
        return int(i // f), int(i % f)

    @cached_property
    def prime_divisors(self) -> tuple[QInt, ...]:
        """Prime elements dividing the generator, one per prime ideal."""
        out = []
        for ell in factorize(self.norm) if self.norm > 1 else ():
            st = splitting_type(self.K, ell)
            if st is SplittingType.INERT:
                out.append(self.K(ell))
                continue
            P = cornacchia_search(self.K, ell)
            for Q in (P, conj(P)) if st is SplittingType.SPLIT else (P,):
                if divides(Q, self.gen):
                    out.append(Q)
        return tuple(out)

    def coprime(self, alpha: QInt) -> bool:
        return not any(divides(P, alpha) for P in self.prime_divisors)

    def __str__(self):
        g = self.gen
        return f"{g.a}{g.b:+d}w"


def enumerate_moduli(K: QuadField, Q: int) -> list[RayModulus]:
    """One canonical generator per nonzero ideal of norm <= Q, by norm then generator."""
    if Q < 1:
        raise ValueError("Q must be >= 1")
    s, n = K.omega_trace, K.omega_norm
    bmax = math.isqrt(4 * Q // -K.disc) + 1
    seen = {}
    for b in range(-bmax, bmax + 1):
        # a^2 + s a b + n b^2 <= Q
        disc = s * s * b * b - 4 * (n * b * b - Q)
        if disc < 0:
            continue
        r = math.isqrt(disc)
        for a in range((-s * b - r) // 2 - 1, (-s * b + r) // 2 + 2):
            x = K(a, b)
            N = norm(x)
            if 1 <= N <= Q:
                g = canonical(x, conjugates=False)
                seen[(g.a, g.b)] = g
    gens = sorted(seen.values(), key=lambda g: (norm(g), canonical_key(g)))
    return [RayModulus(K, g) for g in gens]


def totient(q: RayModulus) -> int:
    out = q.norm
    for P in q.prime_divisors:
        NP = norm(P)
        out = out // NP * (NP - 1)
    return out


@cache
def _table(q: RayModulus):
    """Class id of every residue cell (-1 off the unit group) and the class labels."""
    N = q.norm
    cells = np.arange(N)
    a, b = cells // q.hermite[2], cells % q.hermite[2]
    K = q.K
    ok = np.ones(N, bool)
    for P in q.prime_divisors:
        # P | alpha  iff  alpha * conj(P) is divisible by N(P)
        pc = conj(P)
        s, n = K.omega_trace, K.omega_norm
        ta = a * pc.a - n * b * pc.b
        tb = a * pc.b + b * pc.a + s * b * pc.b
        NP = norm(P)
        ok &= ~((ta % NP == 0) & (tb % NP == 0))
    us = [u for u in units(K)]
    unit_cells = sorted({int(q.index(u.a, u.b)) for u in us})
    cls = np.full(N, -1, np.int64)
    labels = []
    for i in np.flatnonzero(ok):
        if cls[i] >= 0:
            continue
        x = K(int(a[i]), int(b[i]))
        orbit = sorted({int(q.index(*(u * x).coeffs)) for u in us})
        reps = sorted(q.residue(j) for j in orbit)
        cls[orbit] = len(labels)
        labels.append(reps[0])
    # renumber classes by label order
    order = np.argsort([lab[0] * N + lab[1] for lab in labels], kind="stable")
    remap = np.empty(len(labels), np.int64)
    remap[order] = np.arange(len(labels))
    cls[cls >= 0] = remap[cls[cls >= 0]]
    return cls, tuple(labels[k] for k in order), len(unit_cells)


def T_of(q: RayModulus) -> int:
    """Number of residue classes mod q that contain a unit."""
    return _table(q)[2]


def h_of(q: RayModulus) -> int:
    return totient(q) // T_of(q)


def class_labels(q: RayModulus) -> tuple[tuple[int, int], ...]:
    return _table(q)[1]


def ray_class_of(pi: QInt, q: RayModulus) -> tuple[int, int]:
    """Label (least residue) of the ray class of (pi) mod q."""
    if not q.coprime(pi):
        raise CoprimalityError(f"{pi} is not coprime to the modulus {q}")
    cls, labels, _ = _table(q)
    return labels[cls[int(q.index(pi.a, pi.b))]]


@dataclass
class RayClassTable:
    modulus: RayModulus
    T: int
    h: int
    labels: dict
    counts: dict

    def check(self):
        assert self.h * self.T == totient(self.modulus)
        assert 1 <= self.T <= 6


# ---------------------------------------------------------------- degree-one primes


@cache
def degree_one_primes(K: QuadField, lo: int, hi: int) -> tuple[np.ndarray, np.ndarray]:
    """Coefficients (a, b) of one generator per degree-one prime P with lo < N(P) <= hi."""
    if hi >= kern.KERNEL_MAX_P:
        raise ValueError("norm bound must stay below 2^31")
    ps = prime_array(lo, hi)
    if not len(ps):
        return np.zeros(0, np.int64), np.zeros(0, np.int64)
    D = K.disc
    odd = ps[ps > 2]
    leg = np.array([pow(D % int(p), (int(p) - 1) // 2, int(p)) for p in odd], np.int64) if len(odd) else odd
    split = odd[leg == 1]
    ram = [int(p) for p in ps if D % int(p) == 0]
    split2 = [2] if lo < 2 <= hi and D % 8 == 1 else []
    big = split[split >= 4 * -D]
    a = np.empty(len(big), np.int64)
    b = np.empty(len(big), np.int64)
    kern.cornacchia_batch(D, big, a, b)
    extra = [cornacchia_search(K, int(p)) for p in split[split < 4 * -D]] + [cornacchia_search(K, p) for p in split2]
    ea = np.array([e.a for e in extra], np.int64)
    eb = np.array([e.b for e in extra], np.int64)
    sa, sb = np.concatenate([a, ea]), np.concatenate([b, eb])
    s = K.omega_trace
    # conjugates of the split primes, then the ramified primes once
    ra = [cornacchia_search(K, p) for p in ram]
    A = np.concatenate([sa, sa + s * sb, np.array([r.a for r in ra], np.int64)])
    B = np.concatenate([sb, -sb, np.array([r.b for r in ra], np.int64)])
    return A, B


def class_counts(x: int, q: RayModulus, lo: int = 0) -> np.ndarray:
    """Degree-one primes coprime to q with lo < N(P) <= x, tallied by class id."""
    cls, labels, _ = _table(q)
    if x <= lo:
        return np.zeros(len(labels), np.int64)
    A, B = degree_one_primes(q.K, lo, x)
    c = cls[q.index(A, B)]
    return np.bincount(c[c >= 0], minlength=len(labels))


def pi_x_q_a(x: int, q: RayModulus, a) -> int:
    """Degree-one primes P coprime to q, N(P) <= x, in the class labelled ``a``."""
    labels = class_labels(q)
    a = tuple(a)
    if a not in labels:
        raise ValueError(f"{a} is not a class label mod {q}")
    return int(class_counts(x, q)[labels.index(a)])


def class_table(x: int, q: RayModulus) -> RayClassTable:
    cls, labels, T = _table(q)
    counts = class_counts(x, q)
    lab = {q.residue(i): labels[c] for i, c in enumerate(cls) if c >= 0}
    t = RayClassTable(q, T, h_of(q), lab, dict(zip(labels, counts.tolist())))
    t.check()
    return t


# ---------------------------------------------------------------- statistics


def _max_dev(counts: np.ndarray, expected: float) -> float:
    return float(np.max(np.abs(counts - expected)))


def bv_statistic(K: QuadField, x: int, Q: int) -> float:
    """sum over N(q) <= Q of max_a |pi(x, q, a) - li(x)/h(q)|."""
    if Q * Q > x:
        raise ValueError("need Q <= sqrt(x)")
    L = li(x)
    return math.fsum(_max_dev(class_counts(x, q), L / h_of(q)) for q in enumerate_moduli(K, Q))


def bv_short_interval_statistic(K: QuadField, x: int, h: int, Q: int) -> float:
    """As ``bv_statistic`` for the primes with x < N(P) <= x + h."""
    if not 0 < h <= x:
        raise ValueError("need 0 < h <= x")
    L = li(x + h) - li(x)
    return math.fsum(_max_dev(class_counts(x + h, q, lo=x), L / h_of(q)) for q in enumerate_moduli(K, Q))


def bvsi_regime(x: int, h: int, Q: int, degree: int = 2) -> dict:
    """Where (h, Q) sits relative to the short-interval Bombieri-Vinogradov range.

    Writing h = x^(1 - delta) and Q = x^theta, the range is
    0 <= delta < 2/(5n) and theta < (2 - 5 n delta)/(5n + 10).
    """
    lx = math.log(x)
    delta = 1 - math.log(h) / lx
    theta = math.log(Q) / lx if Q > 1 else 0.0
    theta_max = (2 - 5 * degree * delta) / (5 * degree + 10)
    inside = 0 <= delta < 2 / (5 * degree) and theta < theta_max
    return {"delta": delta, "theta": theta, "theta_max": theta_max, "inside": inside}


@dataclass
class BTReport:
    modulus: RayModulus
    x: int
    slack: float
    bound: float
    margins: dict  # class label -> bound - count

    @property
    def passed(self) -> bool:
        return all(m >= 0 for m in self.margins.values())

    def raise_if_failed(self):
        if not self.passed:
            bad = {k: v for k, v in self.margins.items() if v < 0}
            raise InequalityViolation(f"Brun-Titchmarsh bound {self.bound:.1f} exceeded mod {self.modulus}: {bad}")
        return self


def brun_titchmarsh_check(x: int, q: RayModulus, slack: float = 1.5) -> BTReport:
    """Check pi(x, q, a) <= slack * 2x / (h(q) log(x / N(q))) for every class a."""
    if slack < 0:
        raise ValueError("slack must be nonnegative")
    if q.norm >= x:
        raise ValueError("need N(q) < x")
    bound = slack * 2 * x / (h_of(q) * math.log(x / q.norm))
    counts = class_counts(x, q)
    return BTReport(q, x, slack, bound, {lab: bound - int(c) for lab, c in zip(class_labels(q), counts)})


def class_rows(x: int, q: RayModulus) -> list[str]:
    h = h_of(q)
    exp = li(x) / h
    return [
        f"{q.K.disc},{q.norm},{q},{T_of(q)},{h},{lab[0]}:{lab[1]},{int(c)},{exp:.3f},{abs(int(c) - exp):.3f}"
        for lab, c in zip(class_labels(q), class_counts(x, q))
    ]
