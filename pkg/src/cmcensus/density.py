"""Density constants: local factors, truncated series, tail bounds, empirical estimators.

The square-free density is modelled as

    delta_E = 1/2 * sum over square-free m of mu(m) d(m),

where d(m) is the proportion of units alpha of O_K/m^2 with
N(alpha - 1) = 0 mod m^2.  d is multiplicative, so only the prime factors
d(ell) are ever enumerated.  All model sums are exact Fractions.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cache

import mpmath
import numpy as np

from .cmcurve import CMCurve
from .quadarith import HEEGNER_DISCS, QuadField, SplittingType, splitting_type
from .sieve import factorize, prime_count, small_primes

DENSITY_HEADER = "curve_id,constant,model,M,value,tail_bound,notes"
EMPIRICAL_X = 10**6


class Model(enum.Enum):
    FULL_IMAGE = "FullImage"
    EMPIRICAL = "Empirical"


@dataclass(frozen=True)
class LocalFactor:
    ell: int
    split: SplittingType
    numerator: int
    denominator: int

    @property
    def value(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)

    def __str__(self):
        return f"d({self.ell}) = {self.numerator}/{self.denominator} [{self.split.value}]"


@dataclass(frozen=True)
class DensityEstimate:
    value: float
    M: int
    tail_bound: float
    model: Model
    exact: Fraction | None = None
    notes: str = ""

    def row(self, curve_id: str, constant: str) -> str:
        notes = self.notes.replace(",", ";")
        return f"{curve_id},{constant},{self.model.value},{self.M},{self.value:.12f},{self.tail_bound:.3e},{notes}"


# ---------------------------------------------------------------- local factors


def _unit_count(K: QuadField, ell: int, st: SplittingType) -> int:
    # |(O_K / ell^2)^*|
    if st is SplittingType.SPLIT:
        return ell * ell * (ell - 1) ** 2
    if st is SplittingType.INERT:
        return ell * ell * (ell * ell - 1)
    return ell**3 * (ell - 1)


def local_factor(K: QuadField, ell: int) -> LocalFactor:
    """d(ell) in closed form, by splitting type.

    split:    alpha <-> (x, y) in (Z/ell^2)^*^2 and N(alpha-1) <-> (x-1)(y-1),
              which gives ell(3 ell - 4) solutions;
    inert:    N(alpha-1) = 0 mod ell^2 iff alpha = 1 mod ell, ell^2 solutions;
    ramified: alpha = 1 mod the square of the prime above ell, ell^2 solutions.
    """
    st = splitting_type(K, ell)
    if st is SplittingType.SPLIT:
        num = ell * (3 * ell - 4)
    else:
        num = ell * ell
    return LocalFactor(ell, st, num, _unit_count(K, ell, st))


def _enumerate_mod(K: QuadField, m: int) -> tuple[int, int]:
    """(#units alpha of O_K/m^2 with m^2 | N(alpha-1), #units) by brute force."""
    mm = m * m
    s, n = K.omega_trace, K.omega_norm
    a = np.arange(mm, dtype=np.int64)[:, None]
    b = np.arange(mm, dtype=np.int64)[None, :]
    nrm = (a * a + s * a * b + n * b * b) % mm
    unit = np.gcd(nrm, m) == 1
    a1 = a - 1
    hit = (a1 * a1 + s * a1 * b + n * b * b) % mm == 0
    return int((unit & hit).sum()), int(unit.sum())


def local_factor_enumerate(K: QuadField, ell: int) -> LocalFactor:
    """Exhaustive count over all ell^4 residues; the oracle for ``local_factor``."""
    num, den = _enumerate_mod(K, ell)
    return LocalFactor(ell, splitting_type(K, ell), num, den)


def composite_factor_enumerate(K: QuadField, m: int) -> Fraction:
    """d(m) for square-free composite m by direct enumeration mod m^2."""
    num, den = _enumerate_mod(K, m)
    return Fraction(num, den)


def d_model(K: QuadField, m: int) -> Fraction:
    """d(m) assembled multiplicatively from the local factors."""
    out = Fraction(1)
    for ell in factorize(m):
        out *= local_factor(K, ell).value
    return out


# ---------------------------------------------------------------- square-free tables


@cache
def _sqfree_table(M: int):
    """mu, phi and omega for 1..M as numpy arrays (index 0 unused)."""
    mu = np.ones(M + 1, dtype=np.int64)
    phi = np.arange(M + 1, dtype=np.float64)
    omega = np.zeros(M + 1, dtype=np.int64)
    for p in small_primes(max(M, 2)):
        p = int(p)
        if p > M:
            break
        mu[p::p] *= -1
        mu[p * p :: p * p] = 0
        phi[p::p] *= 1 - 1 / p
        omega[p::p] += 1
    mu[0] = 0
    return mu, phi, omega


def squarefree_upto(M: int) -> list[int]:
    mu, _, _ = _sqfree_table(M)
    return [int(m) for m in np.flatnonzero(mu[: M + 1])]


def _mobius(m: int) -> int:
    f = factorize(m)
    if any(e > 1 for e in f.values()):
        return 0
    return -1 if len(f) % 2 else 1


# ---------------------------------------------------------------- tail bounds


@cache
def tail_constant() -> float:
    """C' = 1/2 * max d(ell) phi(ell)^2 over ell <= 1000 and all nine fields.

    For split ell this ratio is (3 ell - 4)/ell < 3, for inert and ramified
    ell it is below 1; so C' < 3/2.
    """
    best = Fraction(0)
    for D in HEEGNER_DISCS:
        K = QuadField(D)
        for ell in small_primes(1000):
            ell = int(ell)
            best = max(best, local_factor(K, ell).value * (ell - 1) ** 2)
    return float(best / 2)


_EULER_CUT = 10**4


@cache
def _full_sum(c: int) -> float:
    """sum over square-free m of c^omega(m) / phi(m)^2 = prod_p (1 + c/(p-1)^2)."""
    with mpmath.workdps(40):
        ps = [int(p) for p in small_primes(_EULER_CUT)]
        log_head = mpmath.fsum(mpmath.log1p(mpmath.mpf(c) / (p - 1) ** 2) for p in ps)

        def zeta_tail(t):
            return mpmath.primezeta(t) - mpmath.fsum(mpmath.mpf(p) ** -t for p in ps)

        def shifted(s):
            # sum_{p > cut} (p - 1)^-s = sum_k C(s+k-1, k) P_tail(s + k)
            return mpmath.fsum(mpmath.binomial(s + k - 1, k) * zeta_tail(s + k) for k in range(8))

        log_tail = mpmath.fsum((-1) ** (j + 1) * mpmath.mpf(c) ** j / j * shifted(2 * j) for j in range(1, 6))
        return float(mpmath.exp(log_head + log_tail))


def tail_bound(M: int, *, strict: bool = False) -> float:
    """Bound for the part of the delta_E series beyond m = M.

    Returns C' * sum_{m > M} mu(m)^2 / phi(m)^2 with C' from ``tail_constant``.
    With ``strict=True`` the per-prime ratio 3 is kept inside the sum,
    1/2 * sum_{m > M} mu(m)^2 3^omega(m) / phi(m)^2, which bounds the FullImage
    tail for every field.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    c = 3 if strict else 1
    mu, phi, omega = _sqfree_table(M)
    w = (mu[1:] != 0) * np.power(float(c), omega[1:]) / phi[1:] ** 2
    tail = _full_sum(c) - math.fsum(w.tolist())
    tail = max(tail, 0.0)
    return 0.5 * tail if strict else tail_constant() * tail


# ---------------------------------------------------------------- delta_E and c_E


def _check_M(M: int) -> None:
    if M < 1:
        raise ValueError("truncation M must be >= 1")


def delta_E_truncated(E: CMCurve, M: int, model: Model = Model.FULL_IMAGE, *,
                      x: int = EMPIRICAL_X, workers=None) -> DensityEstimate:
    """1/2 sum_{m <= M square-free} mu(m) d(m) under the chosen model.

    FullImage uses the exact local factors.  Empirical replaces d(m) by
    pi_D_count(E, x, m) / pi_D_count(E, x, 1).
    """
    _check_M(M)
    model = Model(model)
    ms = squarefree_upto(M)
    tb = tail_bound(M)
    if model is Model.FULL_IMAGE:
        total = Fraction(0)
        for m in ms:
            total += _mobius(m) * d_model(E.K, m)
        exact = total / 2
        bad = sorted(ell for m in ms for ell in factorize(m) if E.bad_modulus % ell == 0)
        note = f"C'={tail_constant():.6f}"
        if bad:
            note += f"; model assumed at bad primes {'/'.join(map(str, sorted(set(bad))))}"
        return DensityEstimate(float(exact), M, tb, model, exact, note)
    from .census import pi_D_counts

    counts = pi_D_counts(E, x, ms, workers=workers)
    base = counts[1]
    value = 0.5 * math.fsum(_mobius(m) * counts[m] / base for m in ms) if base else 0.0
    return DensityEstimate(value, M, tb, model, None, f"x={x}; C'={tail_constant():.6f}")


def galois_degree_model(K: QuadField, m: int) -> int:
    """[Q(E[m]):Q] when the image is all of (O_K/m)^*: 2 |(O_K/m)^*|."""
    out = 2
    for ell in factorize(m):
        st = splitting_type(K, ell)
        if st is SplittingType.SPLIT:
            out *= (ell - 1) ** 2
        elif st is SplittingType.INERT:
            out *= ell * ell - 1
        else:
            out *= ell * (ell - 1)
    return out


def c_E_truncated(E: CMCurve, M: int, model: Model = Model.FULL_IMAGE, *,
                  x: int = EMPIRICAL_X, workers=None) -> DensityEstimate:
    """sum_{m <= M square-free} mu(m) / [Q(E[m]):Q].

    FullImage uses the degree model for m coprime to the bad modulus and the
    empirical split proportion for the remaining m.
    """
    _check_M(M)
    model = Model(model)
    ms = squarefree_upto(M)
    if model is Model.FULL_IMAGE:
        good = [m for m in ms if math.gcd(m, E.bad_modulus) == 1]
        bad = [m for m in ms if m not in good]
    else:
        good, bad = [1], [m for m in ms if m != 1]
    exact = sum((Fraction(_mobius(m), 1 if m == 1 else galois_degree_model(E.K, m)) for m in good), Fraction(0))
    notes = []
    value = float(exact)
    if bad:
        from .census import pi_E_split_counts

        counts = pi_E_split_counts(E, x, [1] + bad, workers=workers)
        value += math.fsum(_mobius(m) * counts[m] / counts[1] for m in bad)
        notes.append(f"x={x}; empirical at m={'/'.join(map(str, bad))}")
        exact = None
    # same shape of tail as delta_E: mu(m)^2 / [Q(E[m]):Q] << 1/phi(m)^2
    return DensityEstimate(value, M, tail_bound(M), model, exact, "; ".join(notes))


def empirical_split_density(E: CMCurve, x: int, m: int, *, workers=None) -> float:
    """pi_E_split_count(E, x, m) / pi(x)."""
    if x < 10**3:
        raise ValueError("x must be >= 1000")
    from .census import pi_E_split_count

    return pi_E_split_count(E, x, m, workers=workers) / prime_count(x)
