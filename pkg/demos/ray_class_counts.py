"""Primes of Z[i] sorted into ray classes.

Prints the class counts of degree-one primes for the first few moduli of
Q(i), the normalized Bombieri-Vinogradov statistic at three heights, and the
smallest Brun-Titchmarsh margin over moduli of norm at most 50.

    python demos/ray_class_counts.py
"""
import math

from cmcensus.quadarith import QuadField
from cmcensus.rayclass import (brun_titchmarsh_check, bv_statistic, class_counts, class_labels, enumerate_moduli,
                               h_of, T_of)
from cmcensus.sieve import li

K = QuadField(-4)
x = 10**6
print(f"degree-one primes of Z[i] with norm <= {x:.0e}, li(x) = {li(x):.0f}\n")
for q in enumerate_moduli(K, 13):
    counts = class_counts(x, q)
    cells = " ".join(f"{lab[0]}:{lab[1]}={int(c)}" for lab, c in zip(class_labels(q), counts))
    print(f"q = {str(q):>7}  N = {q.norm:>2}  T = {T_of(q)}  h = {h_of(q):>2}  {cells}")

print("\nbv(x, x^(1/4)) / x")
for x in (10**5, 10**6, 10**7):
    Q = math.isqrt(math.isqrt(x))
    print(f"  x = {x:.0e}, Q = {Q:>2}: {bv_statistic(K, x, Q) / x:.5f}")

worst = min(min(m / r.bound for m in r.margins.values())
            for r in (brun_titchmarsh_check(10**6, q) for q in enumerate_moduli(K, 50)))
print(f"\nBrun-Titchmarsh at x = 1e6, slack 1.5: smallest relative margin {worst:.3f}")
