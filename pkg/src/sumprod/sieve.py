"""Prime and divisor tables."""

from dataclasses import dataclass
from math import isqrt

import numba
import numpy as np

from .config import max_capacity
from .errors import ResourceLimitError


def _budget(limit):
    if limit > max_capacity():
        raise ResourceLimitError(f"table limit {limit} exceeds memory budget {max_capacity()}")


@dataclass(frozen=True)
class PrimeTable:
    limit: int
    primes: np.ndarray

    def __len__(self):
        return self.primes.size

    def between(self, lo, hi):
        """Primes p with lo < p <= hi, ascending."""
        i = np.searchsorted(self.primes, lo, side="right")
        j = np.searchsorted(self.primes, hi, side="right")
        return self.primes[i:j]

    def count_upto(self, x):
        return int(np.searchsorted(self.primes, x, side="right"))


@dataclass(frozen=True)
class DivisorTable:
    limit: int
    tau: np.ndarray

    def __getitem__(self, n):
        return self.tau[n]


def sieve_primes(limit):
    """All primes <= limit (odd-only Eratosthenes sieve)."""
    limit = int(limit)
    if limit < 2:
        raise ValueError("limit must be >= 2")
    _budget(limit)
    # index i stands for 2i + 1
    flags = np.ones(limit // 2 + 1, dtype=bool)
    flags[0] = False
    if limit % 2 == 0:
        flags[-1] = False
    for i in range(1, isqrt(limit) // 2 + 1):
        if flags[i]:
            p = 2 * i + 1
            flags[p * p // 2 :: p] = False
    primes = np.concatenate(([2], 2 * np.flatnonzero(flags) + 1)).astype(np.int64)
    primes = primes[primes <= limit]
    primes.flags.writeable = False
    return PrimeTable(limit, primes)


def segmented_prime_count(limit, segment=1 << 16):
    """pi(limit) by a segmented sieve seeded from trial division.

    Kept separate from :func:`sieve_primes` so the two can cross-check.
    """
    if limit < 2:
        return 0
    root = isqrt(limit)
    base = [p for p in range(2, root + 1) if all(p % q for q in range(2, isqrt(p) + 1))]
    total = 0
    lo = 2
    while lo <= limit:
        hi = min(lo + segment - 1, limit)
        seg = np.ones(hi - lo + 1, dtype=bool)
        for p in base:
            if p * p > hi:
                break
            start = max(p * p, (lo + p - 1) // p * p)
            seg[start - lo :: p] = False
        total += int(seg.sum())
        lo = hi + 1
    return total


def divisor_counts(limit):
    """tau[n] for 0 <= n <= limit (tau[0] = 0).

    Divisor pairs (d, n/d) with d*d <= n add 2, squares correct by one.
    """
    limit = int(limit)
    if limit < 1:
        raise ValueError("limit must be >= 1")
    _budget(limit)
    tau = np.zeros(limit + 1, dtype=np.int64)
    for d in range(1, isqrt(limit) + 1):
        tau[d * d :: d] += 2
        tau[d * d] -= 1
    tau.flags.writeable = False
    return DivisorTable(limit, tau)


@numba.njit(cache=True)
def _divisor_csr(limit):
    counts = np.zeros(limit + 2, dtype=np.int64)
    for d in range(1, limit + 1):
        for m in range(d, limit + 1, d):
            counts[m + 1] += 1
    offsets = np.cumsum(counts)
    fill = offsets[:-1].copy()
    divs = np.empty(offsets[-1], dtype=np.int64)
    for d in range(1, limit + 1):
        for m in range(d, limit + 1, d):
            divs[fill[m]] = d
            fill[m] += 1
    return offsets, divs


@dataclass(frozen=True)
class DivisorLists:
    """Ascending divisors of every m <= limit in CSR layout."""

    limit: int
    offsets: np.ndarray
    divs: np.ndarray

    def of(self, m):
        return self.divs[self.offsets[m] : self.offsets[m + 1]]


def divisor_lists(limit):
    limit = int(limit)
    _budget(limit)
    offsets, divs = _divisor_csr(limit)
    return DivisorLists(limit, offsets, divs)
