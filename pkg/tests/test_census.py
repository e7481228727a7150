import csv

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cmcensus import _kernels as kern
from cmcensus.census import (
    SPLIT_CODE,
    CensusResult,
    NotFound,
    cyclicity_census,
    find_pE,
    interval_census,
    interval_cyclicity_census,
    pi_D_count,
    pi_D_counts,
    pi_E_split_count,
    segment_table,
    squarefree_census,
)
from cmcensus.cmcurve import get_curve, group_structure_oracle, point_count_naive, prime_record
from cmcensus.sieve import is_squarefree, prime_array


def test_kernel_matches_reference_path(curves):
    for E in curves:
        for lo, hi in ((999, 6000), (10**6, 10**6 + 3000), (2**31 - 4000, 2**31 + 200)):
            t = segment_table(E, lo, hi)
            for i in range(0, len(t), 3 if lo < 10**6 else 11):
                p = int(t.p[i])
                r = prime_record(E, p)
                assert (t.split[i], t.a_p[i], t.N_p[i], t.squarefree[i], t.cyclic[i]) == (
                    SPLIT_CODE[r.split], r.a_p, r.N_p, r.squarefree, r.cyclic), (E.id, p)
                if r.pi is not None:
                    assert (t.pi_a[i], t.pi_b[i]) == r.pi.coeffs


def test_cornacchia_batch():
    from cmcensus.quadarith import QuadField, norm

    for D in (-3, -4, -163):
        K = QuadField(D)
        ps = np.array([p for p in prime_array(700, 20000).tolist() if pow(D % p, (p - 1) // 2, p) == 1])
        a, b = np.empty_like(ps), np.empty_like(ps)
        kern.cornacchia_batch(D, ps, a, b)
        for p, x, y in zip(ps.tolist(), a.tolist(), b.tolist()):
            assert norm(K(x, y)) == p


def brute_census(E, lo, hi):
    sf = cy = o = s = 0
    for p in prime_array(max(lo, 2), hi).tolist():
        if not E.is_good(p):
            continue
        N = point_count_naive(E, p)
        a = p + 1 - N
        o += a != 0
        s += a == 0
        sf += a != 0 and is_squarefree(N)
        cy += group_structure_oracle(E, p)[0] == 1
    return o, s, sf, cy


def test_census_against_enumeration(curves):
    for E in curves:
        r = squarefree_census(E, 1500)
        assert r.counts == brute_census(E, 2, 1500), E.id


def test_small_examples(E11, E3, E4):
    r = squarefree_census(E11, 10)
    assert (r.count_squarefree, r.count_cyclic) == (1, 3)
    assert squarefree_census(E4, 10**4).count_squarefree == 0
    assert cyclicity_census(E4, 10**3).count_cyclic == 0
    assert cyclicity_census(E3, 20).count_cyclic == 3
    assert interval_census(E11, 2, 8).count_squarefree == 1
    assert interval_census(E11, 500, 0).counts == (0, 0, 0, 0)
    assert squarefree_census(get_curve("cm-7"), 2).count_squarefree == 0


def test_result_invariants_and_addition(E11):
    a = squarefree_census(E11, 5000)
    b = interval_census(E11, 5000, 7000)
    c = squarefree_census(E11, 12000)
    assert (a + b).counts == c.counts
    assert (a + b).li_mass == pytest.approx(c.li_mass)
    with pytest.raises(ValueError):
        b + a
    with pytest.raises(AssertionError):
        CensusResult("x", 0, 1, count_squarefree=1)


@settings(max_examples=8, deadline=None)
@given(st.lists(st.integers(10**3 + 1, 10**5 - 1), min_size=1, max_size=6, unique=True),
       st.sampled_from(["cm-3", "cm-11", "cm-19", "cm-163"]))
def test_additivity_over_random_partitions(cuts, cid):
    E = get_curve(cid)
    pts = [10**3] + sorted(cuts) + [10**5]
    total = interval_census(E, 10**3, 10**5 - 10**3)
    parts = [interval_cyclicity_census(E, a, b - a) for a, b in zip(pts, pts[1:])]
    assert tuple(map(sum, zip(*(p.counts for p in parts)))) == total.counts


def test_segment_size_does_not_matter(E11):
    a = squarefree_census(E11, 3 * 10**5)
    b = squarefree_census(E11, 3 * 10**5, segment_size=4099)
    assert a == b


def test_squarefree_implies_cyclic(curves):
    for E in curves:
        t = segment_table(E, 0, 2 * 10**5)
        assert not np.any(t.squarefree & ~t.cyclic)


def test_records_csv(tmp_path, E11):
    path = tmp_path / "rec.csv"
    r = squarefree_census(E11, 50, records_path=path)
    assert r.records_path == str(path)
    rows = list(csv.DictReader(open(path)))
    assert [int(x["p"]) for x in rows] == [3, 5, 7, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47]
    assert rows[0] == {"p": "3", "split": "S", "a_p": "-1", "N_p": "5", "squarefree": "1", "cyclic": "1"}
    assert {x["split"] for x in rows} <= {"S", "I"}


def test_pi_E_split_count_examples(E4, E3):
    assert pi_E_split_count(E4, 20, 2) == 7
    assert pi_E_split_count(E3, 20, 2) == 3
    assert pi_E_split_count(E3, 1000, 1) == len(prime_array(3, 1000))
    with pytest.raises(ValueError):
        pi_E_split_count(E3, 100, 4)


def test_pi_E_split_count_against_oracle(curves):
    for E in curves:
        n1 = {p: group_structure_oracle(E, p)[0] for p in prime_array(2, 700).tolist() if E.is_good(p)}
        for m in (2, 3, 5, 6):
            assert pi_E_split_count(E, 700, m) == sum(1 for v in n1.values() if v % m == 0), (E.id, m)


def test_pi_D_count_examples(E4, E11):
    assert pi_D_count(E4, 20, 2) == 6
    assert pi_D_count(E11, 10, 3) == 2
    split = [p for p in prime_array(2, 10**4).tolist() if E11.is_good(p) and pow(-11 % p, (p - 1) // 2, p) == 1]
    assert pi_D_count(E11, 10**4, 1) == 2 * len(split)


def test_pi_D_monotone_in_divisibility(E11):
    c = pi_D_counts(E11, 10**5, [1, 2, 3, 5, 6, 10, 15, 30])
    for m, mm in ((1, 2), (2, 6), (3, 6), (5, 10), (5, 15), (6, 30), (10, 30), (15, 30)):
        assert c[mm] <= c[m]


def test_find_pE(E11, E4, E3):
    assert find_pE(E11) == 3
    assert find_pE(E4, 10**5) == NotFound(10**5)
    assert not find_pE(E3, 10**5)
    assert find_pE(get_curve("cm-19")) == next(
        p for p in prime_array(2, 1000).tolist()
        if get_curve("cm-19").is_good(p) and prime_record(get_curve("cm-19"), p).squarefree)
    with pytest.raises(ValueError):
        find_pE(E11, 5)


def test_worker_count_does_not_change_results(tmp_path, E11):
    a = squarefree_census(E11, 3 * 10**5, workers=1, segment_size=1 << 16, records_path=tmp_path / "a.csv")
    b = squarefree_census(E11, 3 * 10**5, workers=3, segment_size=1 << 16, records_path=tmp_path / "b.csv")
    assert a.counts == b.counts
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
