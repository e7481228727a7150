import pytest
from hypothesis import given, settings, strategies as st

from cmcensus.quadarith import (
    HEEGNER_DISCS,
    NoRepresentation,
    QuadField,
    SplittingType,
    canonical,
    conj,
    content,
    cornacchia,
    cornacchia_search,
    divides,
    is_unit_mod,
    kronecker,
    mod_reduce,
    norm,
    orbit,
    split_by_ramification,
    splitting_type,
    sqrt_mod_prime,
    trace,
    units,
)
from cmcensus.sieve import prime_array

fields_ = st.sampled_from(HEEGNER_DISCS).map(QuadField)
small = st.integers(-10**6, 10**6)


def test_rejects_non_heegner():
    with pytest.raises(ValueError):
        QuadField(-5)


@pytest.mark.parametrize("D,count", [(-3, 6), (-4, 4), (-7, 2), (-163, 2)])
def test_unit_groups(D, count):
    K = QuadField(D)
    us = units(K)
    assert len(us) == count == K.unit_count
    assert all(norm(u) == 1 for u in us)


@given(fields_, small, small, small, small)
def test_norm_is_multiplicative(K, a, b, c, d):
    x, y = K(a, b), K(c, d)
    assert norm(x * y) == norm(x) * norm(y)
    assert x * conj(x) == K(norm(x))
    assert x + conj(x) == K(trace(x))


@given(fields_, small, small)
def test_omega_satisfies_its_polynomial(K, a, b):
    w = K(0, 1)
    assert w * w == K.omega_trace * w - K.omega_norm
    assert conj(conj(K(a, b))) == K(a, b)


@pytest.mark.parametrize("D,p,expected", [(-4, 5, (1, 2)), (-4, 13, (2, 3)), (-3, 7, (1, 2))])
def test_cornacchia_examples(D, p, expected):
    assert cornacchia(QuadField(D), p).coeffs == expected


def test_cornacchia_inert_raises():
    with pytest.raises(NoRepresentation):
        cornacchia(QuadField(-4), 7)


@pytest.mark.parametrize("D", HEEGNER_DISCS)
def test_cornacchia_matches_exhaustive_search(D):
    K = QuadField(D)
    for p in prime_array(2, 5000).tolist():
        if splitting_type(K, p) is SplittingType.INERT:
            with pytest.raises(NoRepresentation):
                cornacchia_search(K, p)
            continue
        q = cornacchia(K, p)
        assert norm(q) == p
        assert q == cornacchia_search(K, p)


@given(fields_, small, small)
def test_canonical_is_an_orbit_invariant(K, a, b):
    x = K(a, b)
    if not x:
        return
    c = canonical(x)
    assert all(canonical(y) == c for y in orbit(x))
    cu = canonical(x, conjugates=False)
    assert all(canonical(u * x, conjugates=False) == cu for u in units(K))


@given(st.sampled_from(prime_array(2, 2000).tolist()), st.integers(-500, 500))
def test_kronecker_against_squares(p, d):
    k = kronecker(d, p)
    if p == 2:
        if d % 2 == 0:
            assert k == 0
        else:
            # (d|2) = 1 iff d = +-1 mod 8
            assert k == (1 if d % 8 in (1, 7) else -1)
        return
    squares = {x * x % p for x in range(1, p)}
    assert k == (0 if d % p == 0 else 1 if d % p in squares else -1)


@given(st.sampled_from(prime_array(2, 3000).tolist()), st.integers(0, 10**6))
def test_sqrt_mod_prime(p, n):
    r = sqrt_mod_prime(n, p)
    if r is None:
        assert pow(n % p, (p - 1) // 2, p) == p - 1
    else:
        assert r * r % p == n % p


def test_splitting_type_needs_prime():
    with pytest.raises(ValueError):
        splitting_type(QuadField(-4), 15)
    assert splitting_type(QuadField(-4), 2) is SplittingType.RAMIFIED
    assert splitting_type(QuadField(-7), 2) is SplittingType.SPLIT
    assert splitting_type(QuadField(-11), 2) is SplittingType.INERT


def test_split_by_ramification():
    K = QuadField(-4)
    # 3 inert, 2 ramified, 5 split
    assert split_by_ramification(K, 30) == (3, 2, 5)
    assert split_by_ramification(K, 1) == (1, 1, 1)
    with pytest.raises(ValueError):
        split_by_ramification(K, 12)


def test_divides_and_content():
    K = QuadField(-4)
    assert divides(K(1, 1), K(2))
    assert divides(K(2, 1), K(5))
    assert not divides(K(2, 1), K(2, -1))
    assert divides(3, K(3, 6)) and not divides(3, K(3, 4))
    assert content(K(6, 9)) == 3
    with pytest.raises(ValueError):
        divides(K(0), K(1))


def test_mod_reduce_and_units_mod():
    K = QuadField(-3)
    assert mod_reduce(K(7, -1), 3) == K(1, 2)
    assert is_unit_mod(K(1, 1), 2) and not is_unit_mod(K(2, 0), 2)
    with pytest.raises(ValueError):
        mod_reduce(K(1), 0)


def test_mixed_fields_do_not_combine():
    with pytest.raises(TypeError):
        QuadField(-3)(1, 1) + QuadField(-4)(1, 1)
