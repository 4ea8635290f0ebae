"""Numba kernels over packed little-endian uint64 bit arrays.

Bit ``x`` lives in word ``x >> 6`` at position ``x & 63``.  All shifts are
done on explicit ``np.uint64`` operands; mixing signed and unsigned 64-bit
integers makes numba fall back to float arithmetic.
"""

import numba
import numpy as np

ONE = np.uint64(1)
ZERO = np.uint64(0)
FULL = np.uint64(0xFFFFFFFFFFFFFFFF)


@numba.njit(cache=True, nogil=True)
def set_bits(words, elements):
    for x in elements:
        words[x >> 6] |= ONE << np.uint64(x & 63)


@numba.njit(cache=True, nogil=True)
def clear_above(words, limit):
    """Zero every bit strictly above ``limit``."""
    w = limit >> 6
    r = limit & 63
    if w < words.size:
        if r == 63:
            pass
        else:
            words[w] &= (ONE << np.uint64(r + 1)) - ONE
        for i in range(w + 1, words.size):
            words[i] = ZERO


@numba.njit(cache=True, nogil=True)
def shifted_or(out, src, shifts, limit):
    """out |= src << s for every s in ``shifts`` (bits above limit dropped).

    ``shifts`` must be sorted ascending and nonnegative.
    """
    nwo = (limit >> 6) + 1
    if nwo > out.size:
        nwo = out.size
    nws = src.size
    for s in shifts:
        if s > limit:
            break
        q = s >> 6
        r = np.uint64(s & 63)
        # only source words whose shifted image can land at or below limit
        top = ((limit - s) >> 6) + 1
        if top > nws:
            top = nws
        if r == 0:
            for w in range(top):
                out[w + q] |= src[w]
        else:
            back = np.uint64(64) - r
            for w in range(top):
                v = src[w]
                if v == 0:
                    continue
                tw = w + q
                out[tw] |= v << r
                if tw + 1 < nwo:
                    out[tw + 1] |= v >> back
    clear_above(out, limit)


@numba.njit(cache=True, nogil=True)
def product_mark(out, ea, eb, limit, same):
    """Mark a*b <= limit for positive a in ea, b in eb (both sorted).

    With ``same`` set, ea and eb are the same array and only a <= b is
    visited.
    """
    for i in range(ea.size):
        a = ea[i]
        if a == 0:
            continue
        if a > limit:
            break
        cap = limit // a
        if same:
            if a > cap:
                break
            start = i
        else:
            start = 0
        for j in range(start, eb.size):
            b = eb[j]
            if b == 0:
                continue
            if b > cap:
                break
            p = a * b
            out[p >> 6] |= ONE << np.uint64(p & 63)


@numba.njit(cache=True, nogil=True)
def dilate_mark(out, ea, c, limit):
    for a in ea:
        if a > limit // c:
            break
        p = a * c
        out[p >> 6] |= ONE << np.uint64(p & 63)


@numba.njit(cache=True, nogil=True)
def popcount64(v):
    v = v - ((v >> np.uint64(1)) & np.uint64(0x5555555555555555))
    v = (v & np.uint64(0x3333333333333333)) + ((v >> np.uint64(2)) & np.uint64(0x3333333333333333))
    v = (v + (v >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    return (v * np.uint64(0x0101010101010101)) >> np.uint64(56)
