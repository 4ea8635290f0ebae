"""Deterministic additive complements by greedy block covering.

Targets are processed dyadic block by dyadic block.  Inside a block the
shift b covering the most still-uncovered targets is added to B (ties go
to the smallest b) until the block is covered.  Gains only decrease as B
grows, so a lazy max-heap seeded with exact FFT-computed gains yields the
exact greedy choice while re-evaluating few candidates.
"""

import heapq
import math
from dataclasses import dataclass, field

import numba
import numba.typed
import numpy as np
from scipy.signal import fftconvolve

from ..errors import ConstructionError
from ..intset import IntSet, count_upto, make_set


@numba.njit(cache=True, nogil=True)
def _gain(a_els, covered, b, lo, hi, i0):
    g = 0
    for i in range(i0, a_els.size):
        t = a_els[i] + b
        if t > hi:
            break
        if not covered[t]:
            g += 1
    return g


@numba.njit(cache=True, nogil=True)
def _apply(a_els, covered, b, limit):
    for a in a_els:
        t = a + b
        if t > limit:
            break
        covered[t] = True


@numba.njit(cache=True, nogil=True)
def _greedy_block(a_els, covered, cand, gains, lo, hi, limit, remaining, budget, out):
    """Lazy greedy cover of [lo, hi], appending chosen shifts to out.

    Heap keys pack (-gain, b) into one int64 so ties go to the smaller b.
    Returns the uncovered count left: 0 when done, -1 if stuck, otherwise
    the work budget ran out and the caller should refresh the gains.
    """
    span = np.int64(limit + 1)
    top = np.int64(hi - lo + 2)
    heap = [np.int64(0)] * 0
    for i in range(cand.size):
        heap.append((top - gains[i]) * span + cand[i])
    heapq.heapify(heap)
    work = 0
    while remaining > 0:
        if len(heap) == 0:
            return -1
        if work > budget:
            return remaining
        key = heapq.heappop(heap)
        g0 = top - key // span
        b = key % span
        i0 = np.searchsorted(a_els, lo - b)
        g = _gain(a_els, covered, b, lo, hi, i0)
        work += np.searchsorted(a_els, hi - b + 1) - i0 + 16
        if g == g0:
            _apply(a_els, covered, b, limit)
            out.append(b)
            remaining -= g
        elif g > 0:
            heapq.heappush(heap, (top - g) * span + b)
    return 0


def dyadic_blocks(start, limit):
    """[start, 1] (if start <= 1), then (2^l, 2^(l+1)] clipped to [start, limit]."""
    blocks = []
    if start <= 1:
        blocks.append((start, min(1, limit)))
    l = 0
    while (1 << l) < limit:
        lo = max(start, (1 << l) + 1)
        hi = min(limit, 1 << (l + 1))
        if lo <= hi:
            blocks.append((lo, hi))
        l += 1
    return blocks


def _block_gains(a_mask, uncovered, lo, hi):
    """g[b] = #{a in A : a + b in [lo, hi] uncovered} for 0 <= b <= hi."""
    u = uncovered.astype(np.float64)
    alpha = a_mask[: hi + 1].astype(np.float64)
    if u.size * alpha.size < 4_000_000:
        conv = np.convolve(u, alpha[::-1])
    else:
        conv = fftconvolve(u, alpha[::-1])
    w = hi - lo
    return np.rint(conv[w : w + hi + 1]).astype(np.int64)


@dataclass
class LorentzResult:
    B: IntSet
    start: int
    limit: int
    profile: list = field(default_factory=list)  # (X, B(X), S(X), B(X)/S(X))
    fitted_constant: float = math.nan


def lorentz_profile(A, B, start, limit):
    """B(X) against S(X) = sum_{n<=X, A(n)>0} ln A(n) / A(n) on dyadic X."""
    counts = count_upto(A, np.arange(limit + 1))
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(counts > 0, np.log(np.maximum(counts, 1)) / np.maximum(counts, 1), 0.0)
    terms[0] = 0.0
    S = np.cumsum(terms)
    rows = []
    X = 2
    while X <= limit:
        if X >= start:
            bx = count_upto(B, X)
            sx = float(S[X])
            rows.append((X, bx, sx, bx / sx if sx > 0 else math.nan))
        X *= 2
    ratios = [r[3] for r in rows if math.isfinite(r[3])]
    return rows, (max(ratios) if ratios else math.nan)


def lorentz_complement(A, limit, start=0):
    """Greedy B with A + B covering [start, limit]; returns a LorentzResult."""
    limit = int(limit)
    start = int(start)
    A = A if A.capacity == limit else A.truncate(limit)
    if count_upto(A, limit) < 2:
        raise ValueError("A must have at least two elements in [1, limit]")
    a_els = np.ascontiguousarray(A.elements())
    a_mask = A.mask()
    amin = int(a_els[0])
    covered = np.zeros(limit + 1, dtype=np.bool_)
    chosen = []
    for lo, hi in dyadic_blocks(start, limit):
        unc = ~covered[lo : hi + 1]
        remaining = int(unc.sum())
        if remaining == 0:
            continue
        first = lo + int(np.argmax(unc))
        if first < amin:
            raise ConstructionError(
                f"target {first} cannot be covered: every element of A exceeds it",
                {"first_uncoverable": first})
        # a full refresh costs about one FFT over the block; spend as much on lazy updates
        budget = 64 * (hi + 1)
        while remaining > 0:
            gains = _block_gains(a_mask, ~covered[lo : hi + 1], lo, hi)
            cand = np.flatnonzero(gains > 0).astype(np.int64)
            out = numba.typed.List.empty_list(numba.int64)
            remaining = _greedy_block(a_els, covered, cand, gains[cand], lo, hi, limit,
                                      remaining, budget, out)
            chosen.extend(out)
            if remaining < 0:
                first = lo + int(np.argmax(~covered[lo : hi + 1]))
                raise ConstructionError(f"target {first} cannot be covered",
                                        {"first_uncoverable": first})
    B = make_set(sorted(set(chosen)), limit)
    rows, C = lorentz_profile(A, B, start, limit)
    return LorentzResult(B, start, limit, rows, C)
