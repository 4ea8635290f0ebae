"""Immutable bitset-backed subsets of [0, capacity] and their arithmetic.

Counting follows the convention A(X) = |A ∩ [1, X]|: element 0 can be
stored and is visible to membership and to coverage scans, but never to
:func:`count_upto`.
"""

import json
import struct

import numpy as np

from . import _bitkernels as K
from .config import max_capacity
from .errors import FormatError, ResourceLimitError

MAGIC = b"SPB1"
_WORD = np.dtype("<u8")


def _nwords(capacity):
    return (capacity >> 6) + 1


def check_capacity(capacity):
    if capacity < 0:
        raise ValueError(f"capacity must be nonnegative, got {capacity}")
    cap = max_capacity()
    if capacity > cap:
        raise ResourceLimitError(f"capacity {capacity} exceeds configured cap {cap}")


class IntSet:
    """A frozen subset of [0, capacity].

    ``words`` is the packed bit array (least significant bit = smallest
    element); ``rank`` holds the number of set bits in all preceding words,
    so prefix counts are one lookup plus one popcount.
    """

    __slots__ = ("capacity", "words", "rank", "meta", "_elements")

    def __init__(self, capacity, words, meta=None):
        check_capacity(capacity)
        words = np.ascontiguousarray(words, dtype=np.uint64)
        if words.size != _nwords(capacity):
            raise ValueError(f"expected {_nwords(capacity)} words, got {words.size}")
        K.clear_above(words, capacity)
        words.flags.writeable = False
        self.capacity = int(capacity)
        self.words = words
        counts = np.bitwise_count(words).astype(np.int64)
        rank = np.zeros(words.size + 1, dtype=np.int64)
        np.cumsum(counts, out=rank[1:])
        rank.flags.writeable = False
        self.rank = rank
        self.meta = dict(meta) if meta else {}
        self._elements = None

    @classmethod
    def from_mask(cls, mask, meta=None):
        mask = np.asarray(mask, dtype=bool)
        capacity = mask.size - 1
        packed = np.packbits(mask, bitorder="little")
        buf = np.zeros(_nwords(capacity) * 8, dtype=np.uint8)
        buf[: packed.size] = packed
        return cls(capacity, buf.view(_WORD).astype(np.uint64), meta)

    @classmethod
    def empty(cls, capacity):
        check_capacity(capacity)
        return cls(capacity, np.zeros(_nwords(capacity), dtype=np.uint64))

    def __contains__(self, x):
        x = int(x)
        if x < 0 or x > self.capacity:
            return False
        return bool((int(self.words[x >> 6]) >> (x & 63)) & 1)

    def __len__(self):
        return int(self.rank[-1])

    def __iter__(self):
        return iter(self.elements().tolist())

    def __eq__(self, other):
        if not isinstance(other, IntSet):
            return NotImplemented
        return self.capacity == other.capacity and np.array_equal(self.words, other.words)

    def __hash__(self):
        return hash((self.capacity, self.words.tobytes()))

    def __repr__(self):
        head = self.elements()[:8].tolist()
        more = ", ..." if len(self) > 8 else ""
        return f"IntSet(capacity={self.capacity}, n={len(self)}, {head}{more})"

    def elements(self):
        """Sorted int64 array of members."""
        if self._elements is None:
            bits = np.unpackbits(self.words.astype(_WORD).view(np.uint8), bitorder="little")
            els = np.flatnonzero(bits[: self.capacity + 1]).astype(np.int64)
            els.flags.writeable = False
            self._elements = els
        return self._elements

    def mask(self):
        bits = np.unpackbits(self.words.astype(_WORD).view(np.uint8), bitorder="little")
        return bits[: self.capacity + 1].astype(bool)

    def member(self, x):
        return x in self

    def count_upto(self, X):
        return count_upto(self, X)

    def truncate(self, limit):
        """The same set restricted to (and re-capacitated at) [0, limit]."""
        limit = int(limit)
        n = _nwords(limit)
        words = np.zeros(n, dtype=np.uint64)
        m = min(n, self.words.size)
        words[:m] = self.words[:m]
        return IntSet(limit, words, self.meta)

    def union(self, other, capacity=None):
        cap = max(self.capacity, other.capacity) if capacity is None else capacity
        words = np.zeros(_nwords(cap), dtype=np.uint64)
        for s in (self, other):
            m = min(words.size, s.words.size)
            words[:m] |= s.words[:m]
        return IntSet(cap, words)

    def with_meta(self, meta):
        return IntSet(self.capacity, self.words.copy(), meta)


def make_set(elements, capacity, meta=None):
    """Build an IntSet; every element must lie in [0, capacity]."""
    capacity = int(capacity)
    check_capacity(capacity)
    els = np.asarray(list(elements) if not isinstance(elements, np.ndarray) else elements,
                     dtype=np.int64).ravel()
    if els.size:
        hi = int(els.max())
        lo = int(els.min())
        if hi > capacity:
            raise ValueError(f"element {hi} exceeds capacity {capacity}")
        if lo < 0:
            raise ValueError(f"negative element {lo}")
    words = np.zeros(_nwords(capacity), dtype=np.uint64)
    K.set_bits(words, els)
    return IntSet(capacity, words, meta)


def interval(lo, hi, capacity=None):
    capacity = hi if capacity is None else capacity
    mask = np.zeros(capacity + 1, dtype=bool)
    mask[lo : hi + 1] = True
    return IntSet.from_mask(mask)


def _prefix(A, X):
    """|A ∩ [0, X]| for an int or array X already validated."""
    X = np.asarray(X, dtype=np.int64)
    w = X >> 6
    r = (X & 63).astype(np.uint64)
    # mask of bits 0..r inclusive; r == 63 needs the full word
    low = np.where(r == 63, np.uint64(0xFFFFFFFFFFFFFFFF),
                   (np.uint64(1) << ((r + np.uint64(1)) & np.uint64(63))) - np.uint64(1))
    part = np.bitwise_count(A.words[w] & low).astype(np.int64)
    return A.rank[w] + part


def count_upto(A, X):
    """A(X) = |A ∩ [1, X]|; X may be a scalar or an integer array."""
    scalar = np.isscalar(X) or np.ndim(X) == 0
    Xa = np.asarray(X, dtype=np.int64)
    if Xa.size and (int(Xa.max()) > A.capacity or int(Xa.min()) < 0):
        raise ValueError(f"X out of range [0, {A.capacity}]")
    zero = 1 if 0 in A else 0
    res = _prefix(A, Xa) - zero
    return int(res) if scalar else res


def _out_capacity(limit):
    limit = int(limit)
    check_capacity(limit)
    return limit


def sumset(A, B, limit):
    """{a + b <= limit : a in A, b in B} via word-parallel shifted OR."""
    limit = _out_capacity(limit)
    out = np.zeros(_nwords(limit), dtype=np.uint64)
    if len(A) == 0 or len(B) == 0:
        return IntSet(limit, out)
    # shift the denser bit array by each element of the sparser set
    sparse, dense = (A, B) if len(A) <= len(B) else (B, A)
    shifts = sparse.elements()
    shifts = shifts[shifts <= limit]
    K.shifted_or(out, np.ascontiguousarray(dense.words), shifts, limit)
    return IntSet(limit, out)


def product_set(A, B, limit):
    """{a * b <= limit : a in A, b in B}; 0 * b = 0 is included."""
    limit = _out_capacity(limit)
    out = np.zeros(_nwords(limit), dtype=np.uint64)
    if len(A) == 0 or len(B) == 0:
        return IntSet(limit, out)
    ea = A.elements()
    eb = B.elements()
    if 0 in A or 0 in B:
        out[0] |= np.uint64(1)
    same = A is B or A == B
    if same:
        K.product_mark(out, ea, ea, limit, True)
    elif len(A) <= len(B):
        K.product_mark(out, ea, eb, limit, False)
    else:
        K.product_mark(out, eb, ea, limit, False)
    return IntSet(limit, out)


def power_set_k(A, k, limit):
    """A^k = A A^{k-1} with A^1 = A (truncated at limit)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    limit = _out_capacity(limit)
    base = A if A.capacity == limit else A.truncate(limit)
    res = base
    for _ in range(k - 1):
        res = product_set(res, base, limit)
    return res


def dilate(A, c, limit):
    """{c * a <= limit : a in A} for a nonnegative integer c."""
    limit = _out_capacity(limit)
    out = np.zeros(_nwords(limit), dtype=np.uint64)
    if len(A) == 0:
        return IntSet(limit, out)
    if c == 0:
        out[0] = np.uint64(1)
        return IntSet(limit, out)
    K.dilate_mark(out, A.elements(), int(c), limit)
    return IntSet(limit, out)


def pair_count_upto(A, B, X):
    """Number of ordered pairs (a, b), a in A, b in B, a, b >= 1, ab <= X.

    Unlike ``product_set`` every factorization counts.
    """
    X = int(X)
    if X > A.capacity or X > B.capacity:
        raise ValueError("X exceeds a set capacity")
    if X < 1:
        return 0
    a = A.elements()
    a = a[(a >= 1) & (a <= X)]
    if a.size == 0:
        return 0
    return int(count_upto(B, X // a).sum())


def serialize(A, meta=None):
    """SPB1 bytes: magic, u32 metadata length, JSON metadata, LE u64 words."""
    md = dict(A.meta)
    if meta:
        md.update(meta)
    md["capacity"] = A.capacity
    blob = json.dumps(md, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return b"".join([MAGIC, struct.pack("<I", len(blob)), blob,
                     A.words.astype(_WORD).tobytes()])


def deserialize(data):
    data = bytes(data)
    if len(data) < 8 or data[:4] != MAGIC:
        raise FormatError("bad magic (expected SPB1)")
    (mlen,) = struct.unpack("<I", data[4:8])
    if len(data) < 8 + mlen:
        raise FormatError("truncated metadata")
    try:
        md = json.loads(data[8 : 8 + mlen].decode("utf-8"))
        capacity = int(md["capacity"])
    except (ValueError, KeyError, TypeError) as exc:
        raise FormatError(f"unreadable metadata: {exc}") from None
    body = data[8 + mlen :]
    need = _nwords(capacity) * 8
    if len(body) < need:
        raise FormatError(f"truncated bit array: {len(body)} of {need} bytes")
    if len(body) > need:
        raise FormatError(f"{len(body) - need} trailing bytes after bit array")
    words = np.frombuffer(body, dtype=_WORD).astype(np.uint64)
    md.pop("capacity")
    return IntSet(capacity, words, md)


def save(A, path, meta=None):
    data = serialize(A, meta)
    with open(path, "wb") as fh:
        fh.write(data)
    return data


def load(path):
    with open(path, "rb") as fh:
        return deserialize(fh.read())


# prime and divisor tables live in .sieve; re-exported for callers of this module
from .sieve import DivisorTable, PrimeTable, divisor_counts, sieve_primes  # noqa: E402,F401
