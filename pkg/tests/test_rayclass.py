import math

import numpy as np
import pytest

from cmcensus.quadarith import HEEGNER_DISCS, QuadField, SplittingType, conj, divides, norm, splitting_type, units
from cmcensus.rayclass import (
    CoprimalityError,
    InequalityViolation,
    RayModulus,
    brun_titchmarsh_check,
    bv_short_interval_statistic,
    bv_statistic,
    bvsi_regime,
    class_counts,
    class_labels,
    class_table,
    degree_one_primes,
    enumerate_moduli,
    h_of,
    pi_x_q_a,
    ray_class_of,
    T_of,
    totient,
)
from cmcensus.sieve import factorize, is_prime64, li

G = QuadField(-4)
EIS = QuadField(-3)


def prime_elements(K, x):
    """One generator per degree-one prime of norm <= x, by brute search."""
    out = {}
    r = math.isqrt(4 * x) + 2
    for a in range(-r, r + 1):
        for b in range(-r, r + 1):
            alpha = K(a, b)
            p = norm(alpha)
            if 2 <= p <= x and is_prime64(p):
                key = min((u * alpha).coeffs for u in units(K))
                out[key] = K(*key)
    return list(out.values())


def same_class(alpha, beta, q):
    return any(divides(q.gen, alpha - u * beta) if q.norm > 1 else True for u in units(alpha.K))


def test_moduli_examples():
    assert [q.norm for q in enumerate_moduli(G, 2)] == [1, 2]
    assert [q.norm for q in enumerate_moduli(G, 5)] == [1, 2, 4, 5, 5]
    gens = {q.gen.coeffs for q in enumerate_moduli(G, 5)}
    assert RayModulus.of(G, 1, 2).gen.coeffs in gens and RayModulus.of(G, 2, 1).gen.coeffs in gens


@pytest.mark.parametrize("D", HEEGNER_DISCS)
def test_moduli_count_ideals(D):
    # ideals of norm p^e: e + 1 if p splits, 1 if ramified, [e even] if inert
    K = QuadField(D)
    per_type = {SplittingType.SPLIT: lambda e: e + 1, SplittingType.RAMIFIED: lambda e: 1,
                SplittingType.INERT: lambda e: 1 - e % 2}
    expected = sum(math.prod(per_type[splitting_type(K, p)](e) for p, e in factorize(n).items())
                   for n in range(1, 61))
    assert len(enumerate_moduli(K, 60)) == expected


def test_T_and_h_examples():
    q3 = RayModulus.of(G, 3)
    assert (T_of(q3), h_of(q3), totient(q3)) == (4, 2, 8)
    assert T_of(RayModulus.of(G, 1, 1)) == 1
    q2 = RayModulus.of(EIS, 2)
    assert (T_of(q2), h_of(q2)) == (3, 1)
    assert h_of(RayModulus.of(G, 1)) == 1


@pytest.mark.parametrize("D", HEEGNER_DISCS)
def test_class_invariants(D):
    K = QuadField(D)
    for q in enumerate_moduli(K, 60):
        T, h = T_of(q), h_of(q)
        assert h * T == totient(q)
        assert T <= (6 if D in (-3, -4) else 2)
        t = class_table(10, q)
        sizes = np.bincount([class_labels(q).index(v) for v in t.labels.values()])
        assert len(sizes) == h and set(sizes.tolist()) == {T}


def test_totient_against_count():
    for K in (G, EIS, QuadField(-7)):
        for q in enumerate_moduli(K, 40):
            r = math.isqrt(q.norm) + 1
            # a box of side 6 sqrt(N(q)) covers every residue class
            cells = {q.index(a, b) for a in range(-3 * r, 3 * r) for b in range(-3 * r, 3 * r)
                     if q.coprime(K(a, b))}
            assert len(cells) == totient(q)


def test_ray_class_of_examples():
    q3 = RayModulus.of(G, 3)
    assert ray_class_of(G(1, 2), q3) == ray_class_of(G(2, 1), q3)
    assert ray_class_of(G(4, 3), q3) == ray_class_of(G(1), q3)
    for alpha in prime_elements(G, 200):
        if alpha.coeffs != (1, 1):
            assert ray_class_of(alpha, q3) == ray_class_of(conj(alpha), q3)
    with pytest.raises(CoprimalityError):
        ray_class_of(G(3, 3), q3)


@pytest.mark.parametrize("D", [-4, -3, -7, -8, -11])
def test_classes_match_divisibility_oracle(D):
    K = QuadField(D)
    primes = prime_elements(K, 400)
    for q in enumerate_moduli(K, 25):
        cop = [a for a in primes if q.coprime(a)]
        for i, a in enumerate(cop[:25]):
            for b in cop[i + 1:25]:
                assert (ray_class_of(a, q) == ray_class_of(b, q)) == same_class(a, b, q), (str(q), a, b)


@pytest.mark.parametrize("D", [-4, -3, -7, -19])
def test_counts_match_oracle(D):
    K = QuadField(D)
    x = 600
    primes = prime_elements(K, x)
    assert len(degree_one_primes(K, 0, x)[0]) == len(primes)
    for q in enumerate_moduli(K, 20):
        got = class_counts(x, q)
        for lab, n in zip(class_labels(q), got.tolist()):
            rep = K(*lab)
            assert n == sum(1 for a in primes if q.coprime(a) and same_class(a, rep, q)), (str(q), lab)


def test_pi_x_q_a_examples():
    q3 = RayModulus.of(G, 3)
    principal = ray_class_of(G(1), q3)
    other = next(lab for lab in class_labels(q3) if lab != principal)
    assert pi_x_q_a(50, q3, principal) == 4
    assert pi_x_q_a(50, q3, other) == 9
    assert pi_x_q_a(50, RayModulus.of(G, 1), class_labels(RayModulus.of(G, 1))[0]) == 13
    with pytest.raises(ValueError):
        pi_x_q_a(50, q3, (7, 7))


def test_sum_over_classes_is_coprime_count():
    for K in (G, EIS, QuadField(-43)):
        total = len(degree_one_primes(K, 0, 10**5)[0])
        for q in enumerate_moduli(K, 30):
            bad = sum(1 for P in q.prime_divisors if norm(P) <= 10**5 and is_prime64(norm(P)))
            assert class_counts(10**5, q).sum() == total - bad


def test_equidistribution_mod_3():
    c = class_counts(10**6, RayModulus.of(G, 3))
    assert abs(int(c[0]) - int(c[1])) / c.max() < 0.05


def test_bv_statistic_basics():
    total = len(degree_one_primes(G, 0, 10**4)[0])
    assert bv_statistic(G, 10**4, 1) == pytest.approx(abs(total - li(10**4)))
    assert bv_statistic(EIS, 10**5, 17) >= 0
    with pytest.raises(ValueError):
        bv_statistic(G, 100, 11)


def test_short_interval_matches_long_counts():
    x, Q = 2 * 10**5, 12
    stat = bv_short_interval_statistic(G, x, x, Q)
    L = li(2 * x) - li(x)
    ref = math.fsum(float(np.max(np.abs(class_counts(2 * x, q) - class_counts(x, q) - L / h_of(q))))
                    for q in enumerate_moduli(G, Q))
    assert stat == pytest.approx(ref)
    assert bv_short_interval_statistic(G, 10**7, 10**6, 10) >= 0
    with pytest.raises(ValueError):
        bv_short_interval_statistic(G, 10, 11, 2)


def test_regime_annotation():
    r = bvsi_regime(10**8, 10**7, 10)
    assert r["delta"] == pytest.approx(1 / 8)
    assert r["theta"] == pytest.approx(1 / 8)
    assert r["theta_max"] == pytest.approx((2 - 10 / 8) / 20)
    assert not r["inside"]
    assert bvsi_regime(10**8, 10**7, 1)["inside"]
    assert not bvsi_regime(10**8, 10**4, 1)["inside"]


def test_brun_titchmarsh():
    for q in (RayModulus.of(G, 3), RayModulus.of(G, 1)):
        assert brun_titchmarsh_check(10**6, q).passed
    rep = brun_titchmarsh_check(10**4, RayModulus.of(G, 3), slack=0.1)
    assert not rep.passed
    with pytest.raises(InequalityViolation):
        rep.raise_if_failed()
    with pytest.raises(ValueError):
        brun_titchmarsh_check(10**6, RayModulus.of(G, 3), slack=-1)


def test_large_norm_bound_rejected():
    with pytest.raises(ValueError):
        degree_one_primes(G, 0, 2**31)
