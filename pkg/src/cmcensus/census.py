"""Prime censuses for a CM curve over long and short intervals.

Every count here ranges over primes ``p >= 3`` of good reduction.  Work is
split into sieve segments; each segment is turned into a per-prime table
(compiled kernel where it applies, the Python reference elsewhere) and reduced
to integers, and partial results are merged in ascending segment order.  The
worker count therefore never changes an answer.
"""
from __future__ import annotations

import multiprocessing as mp
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache, partial
from pathlib import Path
from typing import Callable, NamedTuple

import numpy as np

from . import _kernels as kern
from .cmcurve import (
    NAIVE_FALLBACK,
    CMCurve,
    curve_seed,
    has_full_q_torsion,
    prime_record,
    two_division_splits,
)
from .quadarith import QInt, SplittingType, units
from .sieve import DEFAULT_SEGMENT, factorize, is_squarefree, li, prime_array, segment_bounds, small_primes

SPLIT_CODE = {SplittingType.SPLIT: 0, SplittingType.INERT: 1, SplittingType.RAMIFIED: 2}
SPLIT_LETTER = "SIR"
RECORD_HEADER = "p,split,a_p,N_p,squarefree,cyclic"
SUMMARY_HEADER = "curve_id,lo,hi,ordinary,supersingular,squarefree,cyclic,li_mass"
MIN_P = 3  # p = 2 is left out of every census


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("CM_CENSUS_WORKERS", "1")))
    except ValueError:
        return 1


def li_mass(lo: int, hi: int) -> float:
    """li(hi) - li(lo), with li taken as 0 below 2."""
    a = li(lo) if lo > 2 else 0.0
    b = li(hi) if hi > 2 else 0.0
    return b - a


@dataclass(frozen=True)
class CensusResult:
    curve_id: str
    lo: int
    hi: int
    count_squarefree: int = 0
    count_cyclic: int = 0
    count_ordinary: int = 0
    count_supersingular: int = 0
    li_mass: float = 0.0
    records_path: str | None = None

    def __post_init__(self):
        assert self.count_squarefree <= self.count_ordinary
        assert self.count_cyclic <= self.count_ordinary + self.count_supersingular

    def __add__(self, other: CensusResult) -> CensusResult:
        """Merge two adjacent results (self covers (lo, m], other covers (m, hi])."""
        if other.curve_id != self.curve_id or other.lo != self.hi:
            raise ValueError("can only add adjacent censuses of the same curve")
        return CensusResult(
            self.curve_id,
            self.lo,
            other.hi,
            self.count_squarefree + other.count_squarefree,
            self.count_cyclic + other.count_cyclic,
            self.count_ordinary + other.count_ordinary,
            self.count_supersingular + other.count_supersingular,
            li_mass(self.lo, other.hi),
        )

    @property
    def counts(self) -> tuple[int, int, int, int]:
        return self.count_ordinary, self.count_supersingular, self.count_squarefree, self.count_cyclic

    def summary_row(self) -> str:
        return (
            f"{self.curve_id},{self.lo},{self.hi},{self.count_ordinary},{self.count_supersingular},"
            f"{self.count_squarefree},{self.count_cyclic},{self.li_mass:.6f}"
        )


class NotFound(NamedTuple):
    """No qualifying prime up to ``search_bound``."""

    search_bound: int

    def __bool__(self):
        return False


# ---------------------------------------------------------------- per-segment tables


class PrimeTable(NamedTuple):
    p: np.ndarray
    split: np.ndarray  # 0 split, 1 inert, 2 ramified
    a_p: np.ndarray
    N_p: np.ndarray
    pi_a: np.ndarray
    pi_b: np.ndarray
    squarefree: np.ndarray
    cyclic: np.ndarray
    full2: np.ndarray

    def __len__(self):
        return len(self.p)

    @property
    def ordinary(self):
        return self.a_p != 0

    def pi(self, E: CMCurve, i: int) -> QInt | None:
        return E.K(int(self.pi_a[i]), int(self.pi_b[i])) if self.split[i] == 0 else None


def _empty_table(n: int) -> PrimeTable:
    return PrimeTable(
        np.zeros(n, np.int64), np.zeros(n, np.int8), np.zeros(n, np.int64), np.zeros(n, np.int64),
        np.zeros(n, np.int64), np.zeros(n, np.int64), np.zeros(n, bool), np.zeros(n, bool), np.zeros(n, bool),
    )


@lru_cache(maxsize=16)
def _kernel_args(E: CMCurve, seed_salt: int):
    us = units(E.K)
    A, B = E.short_model
    return (
        E.K.disc, E.K.omega_trace, E.K.omega_norm,
        np.array([u.a for u in us], np.int64), np.array([u.b for u in us], np.int64),
        A, B, E.bad_modulus, np.uint64(curve_seed(E, seed_salt)), small_primes(50000),
    )


def _fill_python(E: CMCurve, t: PrimeTable, idx: np.ndarray, seed_salt: int) -> None:
    for i in idx:
        p = int(t.p[i])
        r = prime_record(E, p, seed_salt)
        t.split[i] = SPLIT_CODE[r.split]
        t.a_p[i], t.N_p[i] = r.a_p, r.N_p
        if r.pi is not None:
            t.pi_a[i], t.pi_b[i] = r.pi.a, r.pi.b
        t.squarefree[i], t.cyclic[i] = r.squarefree, r.cyclic
        t.full2[i] = two_division_splits(E, p)


def segment_table(E: CMCurve, lo: int, hi: int, seed_salt: int = 0) -> PrimeTable:
    """Per-prime data for the good primes ``3 <= p`` in ``(lo, hi]``."""
    ps = prime_array(max(lo, MIN_P - 1), hi) if hi > max(lo, MIN_P - 1) else np.zeros(0, np.int64)
    ps = ps[E.conductor % ps != 0] if len(ps) else ps
    t = _empty_table(len(ps))
    t.p[:] = ps
    fast = (ps >= NAIVE_FALLBACK) & (ps < kern.KERNEL_MAX_P)
    if fast.any():
        sel = np.flatnonzero(fast)
        outs = _empty_table(len(sel))
        status = np.zeros(len(sel), np.int8)
        kern.process_primes(ps[sel], *_kernel_args(E, seed_salt), outs.split, outs.a_p, outs.N_p,
                            outs.pi_a, outs.pi_b, outs.squarefree, outs.cyclic, outs.full2, status)
        for col, src in zip(t[1:], outs[1:]):
            col[sel] = src
        fast[sel[status != kern.OK]] = False  # ambiguous traces go through the reference path
    _fill_python(E, t, np.flatnonzero(~fast), seed_salt)
    return t


# ---------------------------------------------------------------- orchestration


def _run_segment(E, seed_salt, reducer, bounds):
    return reducer(E, segment_table(E, bounds[0], bounds[1], seed_salt))


_pool_cache: dict[int, ProcessPoolExecutor] = {}


def _pool(workers: int) -> ProcessPoolExecutor:
    pool = _pool_cache.get(workers)
    if pool is None:
        # compile before forking so children inherit the kernels
        segment_table(_warm_curve(), 1000, 1100)
        pool = ProcessPoolExecutor(workers, mp_context=mp.get_context("fork"))
        _pool_cache[workers] = pool
    return pool


def _warm_curve():
    from .cmcurve import get_curve

    return get_curve("cm-11")


def map_segments(E: CMCurve, lo: int, hi: int, reducer: Callable, *, workers: int | None = None,
                 segment_size: int = DEFAULT_SEGMENT, seed_salt: int = 0) -> list:
    """``reducer(E, table)`` over consecutive segments of ``(lo, hi]``, results in order."""
    if hi <= lo:
        return []
    workers = default_workers() if workers is None else workers
    if workers < 1:
        raise ValueError("workers must be >= 1")
    bounds = segment_bounds(lo, hi, segment_size)
    job = partial(_run_segment, E, seed_salt, reducer)
    if workers == 1 or len(bounds) == 1:
        return [job(b) for b in bounds]
    return list(_pool(workers).map(job, bounds))


def _count_reducer(E, t: PrimeTable, records: bool = False):
    ordn = t.ordinary
    counts = (int(ordn.sum()), int((~ordn).sum()), int(t.squarefree.sum()), int(t.cyclic.sum()))
    if not records:
        return counts, None
    return counts, np.column_stack([t.p, t.split, t.a_p, t.N_p, t.squarefree, t.cyclic])


def _write_records(path: str | Path, chunks) -> str:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="ascii", newline="\n") as fh:
        fh.write(RECORD_HEADER + "\n")
        for rows in chunks:
            for p, s, a, n, sf, cy in rows.tolist():
                fh.write(f"{p},{SPLIT_LETTER[s]},{a},{n},{sf},{cy}\n")
    os.replace(tmp, path)
    return str(path)


def _census(E: CMCurve, lo: int, hi: int, *, workers=None, segment_size=DEFAULT_SEGMENT,
            seed_salt=0, records_path=None) -> CensusResult:
    if hi <= lo:
        return CensusResult(E.id, lo, lo)
    parts = map_segments(E, lo, hi, partial(_count_reducer, records=records_path is not None),
                         workers=workers, segment_size=segment_size, seed_salt=seed_salt)
    o = s = sf = cy = 0
    for (a, b, c, d), _ in parts:
        o, s, sf, cy = o + a, s + b, sf + c, cy + d
    rp = _write_records(records_path, (r for _, r in parts)) if records_path is not None else None
    return CensusResult(E.id, lo, hi, sf, cy, o, s, li_mass(lo, hi), rp)


def squarefree_census(E: CMCurve, x: int, **kw) -> CensusResult:
    """Counts over all good primes ``3 <= p <= x``; ``count_squarefree`` is h_E(x)."""
    if x < 0:
        raise ValueError("x must be nonnegative")
    return _census(E, 0, x, **kw)


def interval_census(E: CMCurve, x: int, h: int, **kw) -> CensusResult:
    """Counts over ``x < p <= x + h``."""
    if h < 0:
        raise ValueError("h must be nonnegative")
    return _census(E, x, x + h, **kw)


# Cyclicity is tallied in the same pass; these are the names callers expect.
cyclicity_census = squarefree_census
interval_cyclicity_census = interval_census


# ---------------------------------------------------------------- Chebotarev-type counts


def _split_mask(E: CMCurve, t: PrimeTable, q: int, seed_salt: int) -> np.ndarray:
    """Good primes of the table at which E[q] is rational."""
    if q == 2:
        return t.full2.copy()
    split = t.split == 0
    p = t.p
    small = p <= 3
    if E.bad_modulus % q:
        out = split & ((t.pi_a - 1) % q == 0) & (t.pi_b % q == 0)
    else:
        out = np.zeros(len(t), bool)
        small |= p >= kern.KERNEL_MAX_P
        sel = np.flatnonzero(~small)
        res = np.zeros(len(sel), bool)
        A, B = E.short_model
        kern.sampled_batch(p[sel], t.N_p[sel], q, A, B, np.uint64(curve_seed(E, seed_salt)), res)
        out[sel] = res
    for i in np.flatnonzero(small):
        out[i] = has_full_q_torsion(E, int(p[i]), t.pi(E, i), q, seed_salt)
    return out


def _split_count_reducer(E, t, ms, seed_salt):
    masks = {q: _split_mask(E, t, q, seed_salt) for q in sorted({q for m in ms for q in factorize(m)})}
    out = []
    for m in ms:
        mask = np.ones(len(t), bool)
        for q in factorize(m):
            mask &= masks[q]
        out.append(int(mask.sum()))
    return out


def pi_E_split_counts(E: CMCurve, x: int, ms, *, workers=None, seed_salt: int = 0, **kw) -> dict[int, int]:
    """``pi_E_split_count`` for several square-free m in one pass."""
    ms = tuple(int(m) for m in ms)
    for m in ms:
        if m < 1 or not is_squarefree(m):
            raise ValueError(f"m={m} must be a positive square-free integer")
    parts = map_segments(E, 0, x, partial(_split_count_reducer, ms=ms, seed_salt=seed_salt),
                         workers=workers, seed_salt=seed_salt, **kw)
    tot = np.sum(parts, axis=0) if parts else np.zeros(len(ms), int)
    return {m: int(c) for m, c in zip(ms, tot)}


def pi_E_split_count(E: CMCurve, x: int, m: int, **kw) -> int:
    """Good primes ``3 <= p <= x`` splitting completely in Q(E[m]), m square-free.

    That is, E[q] is rational over F_p for every prime q | m.
    """
    return pi_E_split_counts(E, x, (m,), **kw)[m]


def _pi_D_reducer(E, t, ms):
    split = t.split == 0
    ram = t.split == 2
    out = []
    for m in ms:
        hit = (t.N_p % (m * m) == 0) & (np.gcd(t.p, m) == 1)
        out.append(2 * int((split & hit).sum()) + int((ram & hit).sum()))
    return out


def pi_D_counts(E: CMCurve, x: int, ms, *, workers=None, **kw) -> dict[int, int]:
    """``pi_D_count`` for several m in one pass."""
    ms = tuple(int(m) for m in ms)
    if any(m < 1 for m in ms):
        raise ValueError("m must be >= 1")
    parts = map_segments(E, 0, x, partial(_pi_D_reducer, ms=ms), workers=workers, **kw)
    tot = np.sum(parts, axis=0) if parts else np.zeros(len(ms), int)
    return {m: int(c) for m, c in zip(ms, tot)}


def pi_D_count(E: CMCurve, x: int, m: int, **kw) -> int:
    """Degree-one primes P of K, N(P) <= x, P coprime to m N_E, with m^2 | N_p.

    Each split p contributes its two conjugate primes; degree-two primes are
    never counted.
    """
    return pi_D_counts(E, x, (m,), **kw)[m]


# ---------------------------------------------------------------- smallest square-free prime


def find_pE(E: CMCurve, search_bound: int = 10**5, seed_salt: int = 0):
    """Smallest ordinary good prime with square-free N_p, or ``NotFound(search_bound)``."""
    if search_bound < 10:
        raise ValueError("search_bound must be >= 10")
    lo, step = 0, 1 << 12
    while lo < search_bound:
        hi = min(lo + step, search_bound)
        t = segment_table(E, lo, hi, seed_salt)
        hit = np.flatnonzero(t.squarefree)
        if len(hit):
            return int(t.p[hit[0]])
        lo, step = hi, min(step * 2, DEFAULT_SEGMENT)
    return NotFound(search_bound)
