"""Reduction of a CM curve prime by prime.

Takes y^2 + y = x^3 - x^2 - 7x + 10 (CM by the ring of integers of Q(sqrt(-11)))
and prints, for the first few good primes, the splitting type of p, the
Frobenius element pi, the group order N_p = N(pi - 1) and the invariant
factors of the reduced group.  At split primes the first invariant factor is
the content of pi - 1, which is what the census reads off without counting
points.

    python demos/frobenius_walkthrough.py
"""
from cmcensus.cmcurve import get_curve, group_structure_oracle, prime_record
from cmcensus.quadarith import content
from cmcensus.sieve import factorize, prime_array

E = get_curve("cm-11")
print(f"{E.id}: conductor {E.conductor}, field disc {E.K.disc}\n")
print(f"{'p':>4} {'type':>8} {'pi':>10} {'a_p':>5} {'N_p':>5}  factorization   group        sqfree cyclic")
for p in prime_array(2, 120).tolist():
    if not E.is_good(p):
        continue
    r = prime_record(E, p)
    n1, n2 = group_structure_oracle(E, p)
    pi = f"{r.pi.a}{r.pi.b:+d}w" if r.pi is not None else "-"
    fac = " ".join(f"{q}^{e}" if e > 1 else str(q) for q, e in factorize(r.N_p).items())
    grp = f"Z/{n2}" if n1 == 1 else f"Z/{n1} x Z/{n2}"
    print(f"{p:>4} {r.split.name:>8} {pi:>10} {r.a_p:>5} {r.N_p:>5}  {fac:<15} {grp:<12} {r.squarefree!s:>6} {r.cyclic!s:>6}")
    if r.pi is not None:
        assert content(r.pi - 1) == n1

print("\nInert primes are supersingular: a_p = 0 and N_p = p + 1.")
