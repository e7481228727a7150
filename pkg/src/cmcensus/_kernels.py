"""Compiled per-prime pipeline for censuses.

Mirrors ``cmcurve.prime_record`` for primes 1000 <= p < 2^31, where every
product of two residues fits in an int64.  Sampling seeds follow the same
stream as the Python path, so both produce identical records.
"""
import numpy as np
from numba import njit

KERNEL_MAX_P = 1 << 31

_G = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)

SPLIT, INERT, RAMIFIED = 0, 1, 2
OK, AMBIGUOUS = 0, 1


@njit(cache=True)
def splitmix(z):
    z = z + _G
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(cache=True)
def powmod(a, e, p):
    r = 1
    a %= p
    while e > 0:
        if e & 1:
            r = r * a % p
        a = a * a % p
        e >>= 1
    return r


@njit(cache=True)
def isqrt(n):
    r = np.int64(np.sqrt(np.float64(n)))
    while r * r > n:
        r -= 1
    while (r + 1) * (r + 1) <= n:
        r += 1
    return r


@njit(cache=True)
def gcd(a, b):
    while b:
        a, b = b, a % b
    return a


@njit(cache=True)
def sqrtmod(n, p):
    n %= p
    if n == 0:
        return 0
    if p % 4 == 3:
        return powmod(n, (p + 1) // 4, p)
    q = p - 1
    s = 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while powmod(z, (p - 1) // 2, p) != p - 1:
        z += 1
    m = s
    c = powmod(z, q, p)
    t = powmod(n, q, p)
    r = powmod(n, (q + 1) // 2, p)
    while t != 1:
        i = 1
        t2 = t * t % p
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = powmod(c, 1 << (m - i - 1), p)
        r = r * b % p
        c = b * b % p
        t = t * c % p
        m = i
    return r


@njit(cache=True)
def cornacchia4p(D, p):
    """(X, Y) with X^2 + |D| Y^2 = 4p, or (-1, -1)."""
    x0 = sqrtmod(D % p, p)
    if (x0 - D) % 2 != 0:
        x0 = p - x0
    a = 2 * p
    b = x0
    limit = isqrt(4 * p)
    while b > limit:
        a, b = b, a % b
    rem = 4 * p - b * b
    if rem % (-D) != 0:
        return -1, -1
    c = rem // (-D)
    y = isqrt(c)
    if y * y != c:
        return -1, -1
    return b, y


@njit(cache=True)
def xdbl(X, Z, A, B, p):
    XX = X * X % p
    ZZ = Z * Z % p
    w = (XX - A * ZZ % p) % p
    Xr = (w * w % p - 8 * B % p * X % p * ZZ % p * Z % p) % p
    inner = (X * XX % p + A * X % p * ZZ % p + B * ZZ % p * Z % p) % p
    Zr = 4 * Z % p * inner % p
    return Xr, Zr


@njit(cache=True)
def xladder_z(x0, n, A, B, p):
    """Projective (X, Z) of [n]P where x(P) = x0 != 0 on y^2 = x^3 + A x + B."""
    b4 = 4 * B % p
    X0, Z0 = 1, 0
    X1, Z1 = x0, 1
    nbits = 0
    t = n
    while t > 0:
        nbits += 1
        t >>= 1
    for i in range(nbits - 1, -1, -1):
        t = X0 * Z1 % p
        u = X1 * Z0 % p
        zz = Z0 * Z1 % p
        v = (X0 * X1 % p - A * zz % p) % p
        XA = (v * v % p - b4 * zz % p * ((t + u) % p) % p) % p
        d = (t - u) % p
        ZA = x0 * d % p * d % p
        if (n >> i) & 1:
            X0, Z0 = XA, ZA
            X1, Z1 = xdbl(X1, Z1, A, B, p)
        else:
            X1, Z1 = XA, ZA
            X0, Z0 = xdbl(X0, Z0, A, B, p)
    return X0, Z0


@njit(cache=True)
def _polmul(f0, f1, f2, g0, g1, g2, A, B, p):
    r0 = f0 * g0 % p
    r1 = (f0 * g1 + f1 * g0) % p
    r2 = (f0 * g2 % p + f1 * g1 % p + f2 * g0 % p) % p
    r3 = (f1 * g2 + f2 * g1) % p
    r4 = f2 * g2 % p
    # x^4 = -A x^2 - B x, x^3 = -A x - B
    r2 = (r2 - r4 * A % p) % p
    r1 = (r1 - r4 * B % p) % p
    r1 = (r1 - r3 * A % p) % p
    r0 = (r0 - r3 * B % p) % p
    return r0, r1, r2


@njit(cache=True)
def cubic_splits(A, B, p):
    r0, r1, r2 = 1, 0, 0
    b0, b1, b2 = 0, 1, 0
    e = p
    while e > 0:
        if e & 1:
            r0, r1, r2 = _polmul(r0, r1, r2, b0, b1, b2, A, B, p)
        b0, b1, b2 = _polmul(b0, b1, b2, b0, b1, b2, A, B, p)
        e >>= 1
    return r0 == 0 and r1 == 1 and r2 == 0


@njit(cache=True)
def squarefree(n, small):
    if n % 4 == 0 or n % 9 == 0:
        return False
    c = n
    for q in small:
        if q * q * q > n:
            break
        if c % q == 0:
            c //= q
            if c % q == 0:
                return False
    if c == 1:
        return True
    r = isqrt(c)
    return r * r != c


@njit(cache=True)
def _key_less(a1, b1, a2, b2):
    # order used by quadarith.canonical_key: (a <= 0, b < 0, a, b)
    k1 = (1 if a1 <= 0 else 0, 1 if b1 < 0 else 0)
    k2 = (1 if a2 <= 0 else 0, 1 if b2 < 0 else 0)
    if k1[0] != k2[0]:
        return k1[0] < k2[0]
    if k1[1] != k2[1]:
        return k1[1] < k2[1]
    if a1 != a2:
        return a1 < a2
    return b1 < b2


@njit(cache=True)
def sampled_full_torsion(q, N, A, B, p, seed):
    e = 0
    m = N
    while m % q == 0:
        m //= q
        e += 1
    if e < 2:
        return False
    qe1 = 1
    for _ in range(e - 1):
        qe1 *= q
    state = (seed ^ np.uint64(q)) ^ (np.uint64(p) * _G)
    hits = 0
    while hits < 32:
        state = splitmix(state)
        x = np.int64(state % np.uint64(p))
        rhs = (x * x % p * x % p + A * x % p + B) % p
        if x == 0 or rhs == 0 or powmod(rhs, (p - 1) // 2, p) != 1:
            continue
        hits += 1
        X, Z = xladder_z(x, m, A, B, p)
        if Z == 0:
            continue
        xr = X * powmod(Z, p - 2, p) % p
        if xr == 0:
            continue
        if xladder_z(xr, qe1, A, B, p)[1] != 0:
            return False
    return True


@njit(cache=True)
def process_primes(primes, D, s, nw, ua, ub, A0, B0, badmod, seed, small,
                   split, a_out, n_out, pia, pib, sf, cyc, full2, status):
    """Fill per-prime output arrays for good primes 1000 <= p < 2^31."""
    nu = len(ua)
    ca = np.empty(2 * nu, dtype=np.int64)
    cb = np.empty(2 * nu, dtype=np.int64)
    tr = np.empty(2 * nu, dtype=np.int64)
    alive = np.empty(2 * nu, dtype=np.bool_)
    for idx in range(len(primes)):
        p = primes[idx]
        A = A0 % p
        B = B0 % p
        status[idx] = OK
        k = powmod(D % p, (p - 1) // 2, p)
        pa = 0
        pb = 0
        a = 0
        if k == 0:
            split[idx] = RAMIFIED
        elif k == p - 1:
            split[idx] = INERT
        else:
            split[idx] = SPLIT
            X, Y = cornacchia4p(D, p)
            if D % 4 == 0:
                a0, b0 = X // 2, Y
            else:
                a0, b0 = (X - Y) // 2, Y
            # orbit under units and conjugation
            n = 0
            for c in range(2):
                if c == 0:
                    ra, rb = a0, b0
                else:
                    ra, rb = a0 + s * b0, -b0
                for j in range(nu):
                    x1 = ua[j] * ra - nw * ub[j] * rb
                    y1 = ua[j] * rb + ub[j] * ra + s * ub[j] * rb
                    ca[n] = x1
                    cb[n] = y1
                    tr[n] = 2 * x1 + s * y1
                    n += 1
            # distinct traces
            for j in range(n):
                alive[j] = True
                for i in range(j):
                    if tr[i] == tr[j]:
                        alive[j] = False
                        break
            n_alive = 0
            for j in range(n):
                if alive[j]:
                    n_alive += 1
            state = seed ^ (np.uint64(p) * _G)
            for _ in range(32):
                if n_alive == 1:
                    break
                state = splitmix(state)
                x = np.int64(state % np.uint64(p))
                rhs = (x * x % p * x % p + A * x % p + B) % p
                if x == 0 or rhs == 0:
                    continue
                sign = 1 if powmod(rhs, (p - 1) // 2, p) == 1 else -1
                for j in range(n):
                    if alive[j]:
                        order = p + 1 - sign * tr[j]
                        if xladder_z(x, order, A, B, p)[1] != 0:
                            alive[j] = False
                            n_alive -= 1
            if n_alive != 1:
                status[idx] = AMBIGUOUS
                continue
            for j in range(n):
                if alive[j]:
                    a = tr[j]
            first = True
            for j in range(n):
                if tr[j] == a and (first or _key_less(ca[j], cb[j], pa, pb)):
                    pa, pb = ca[j], cb[j]
                    first = False
        N = p + 1 - a
        a_out[idx] = a
        n_out[idx] = N
        pia[idx] = pa
        pib[idx] = pb
        sf[idx] = a != 0 and squarefree(N, small)
        f2 = cubic_splits(A, B, p)
        full2[idx] = f2
        g = gcd(N, p - 1)
        cyclic = True
        for q in small:
            if g == 1:
                break
            if q * q > g:
                q = g  # remaining cofactor is prime
            if g % q != 0:
                continue
            while g % q == 0:
                g //= q
            if N % (q * q) != 0:
                continue
            if q == 2:
                full = f2
            elif split[idx] == SPLIT and badmod % q != 0:
                full = (pa - 1) % q == 0 and pb % q == 0
            elif (p - 1) % q != 0:
                full = False
            else:
                full = sampled_full_torsion(q, N, A, B, p, seed)
            if full:
                cyclic = False
                break
        cyc[idx] = cyclic


@njit(cache=True)
def cornacchia_batch(D, primes, out_a, out_b):
    """Raw (uncanonicalised) element of norm p above each split prime."""
    for i in range(len(primes)):
        p = primes[i]
        X, Y = cornacchia4p(D, p)
        if D % 4 == 0:
            out_a[i] = X // 2
        else:
            out_a[i] = (X - Y) // 2
        out_b[i] = Y


@njit(cache=True)
def sampled_batch(primes, Ns, q, A0, B0, seed, out):
    """``sampled_full_torsion`` over arrays; ``out[i]`` gets the verdict."""
    for i in range(len(primes)):
        p = primes[i]
        N = Ns[i]
        if N % (q * q) != 0 or (p - 1) % q != 0:
            out[i] = False
        else:
            out[i] = sampled_full_torsion(q, N, A0 % p, B0 % p, p, seed)
