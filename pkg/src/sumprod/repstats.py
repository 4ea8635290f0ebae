"""Representations n = ab + cd and the quantities of the Janson argument.

A decomposition is canonical when a < b, c < d, ab <= cd, the four values
are pairwise distinct and, if ab == cd, (a, b) < (c, d) lexicographically.
Each unordered representation has exactly one canonical form, so the
number of ordered tuples is 8 times the canonical count.
"""

import math
import warnings
from collections import namedtuple
from dataclasses import dataclass, field

import numba
import numpy as np

from .errors import ResourceLimitError
from .intset import IntSet
from .sieve import divisor_counts, divisor_lists

DEFAULT_DELTA_CAP = 20_000

Decomposition = namedtuple("Decomposition", "a b c d")

_div_cache = {}
_tau_cache = {}


def _divs(n):
    """Divisor lists covering [0, n], grown geometrically and reused."""
    cur = _div_cache.get("d")
    if cur is None or cur.limit < n:
        cur = divisor_lists(max(n, 2 * cur.limit if cur else 1024))
        _div_cache["d"] = cur
    return cur


def _tau(n):
    cur = _tau_cache.get("t")
    if cur is None or cur.limit < n:
        cur = divisor_counts(max(n, 2 * cur.limit if cur else 1024))
        _tau_cache["t"] = cur
    return cur.tau


@numba.njit(cache=True, nogil=True)
def _decomp_kernel(n, offsets, divs, member, restricted, out, fill):
    """Count (and optionally write) canonical decompositions of n.

    Returns (total, strict) where strict excludes ab == cd ties.
    """
    total = 0
    strict = 0
    for k in range(1, n // 2 + 1):
        m = n - k
        for ia in range(offsets[k], offsets[k + 1]):
            a = divs[ia]
            if a * a >= k:
                break
            b = k // a
            if restricted and not (member[a] and member[b]):
                continue
            for ic in range(offsets[m], offsets[m + 1]):
                c = divs[ic]
                if c * c >= m:
                    break
                d = m // c
                if a == c or a == d or b == c or b == d:
                    continue
                if k == m and not (a < c or (a == c and b < d)):
                    continue
                if restricted and not (member[c] and member[d]):
                    continue
                if fill:
                    out[total, 0] = a
                    out[total, 1] = b
                    out[total, 2] = c
                    out[total, 3] = d
                total += 1
                if k != m:
                    strict += 1
    return total, strict


def _member_mask(restrict, n):
    mask = np.zeros(n + 1, dtype=np.bool_)
    if restrict is not None:
        els = restrict.elements()
        els = els[els <= n]
        mask[els] = True
    return mask


def decompositions(n, restrict=None):
    """All canonical (a, b, c, d) with ab + cd = n as an (m, 4) int64 array.

    With ``restrict`` (an IntSet) all four values must be members.
    """
    n = int(n)
    if n < 1:
        raise ValueError("n must be >= 1")
    D = _divs(n)
    member = _member_mask(restrict, n)
    dummy = np.empty((0, 4), dtype=np.int64)
    total, _ = _decomp_kernel(n, D.offsets, D.divs, member, restrict is not None, dummy, False)
    out = np.empty((total, 4), dtype=np.int64)
    _decomp_kernel(n, D.offsets, D.divs, member, restrict is not None, out, True)
    return out


def decomposition_counts(n, restrict=None):
    """(count with ab <= cd, count with ab < cd)."""
    n = int(n)
    D = _divs(n)
    member = _member_mask(restrict, n)
    dummy = np.empty((0, 4), dtype=np.int64)
    total, strict = _decomp_kernel(n, D.offsets, D.divs, member, restrict is not None, dummy, False)
    return int(total), int(strict)


def rep_count(n, A):
    """R(n): canonical decompositions of n with all four values in A."""
    return decomposition_counts(n, A)[0]


@numba.njit(cache=True, nogil=True)
def _mu_kernel(n, offsets, divs, x):
    # Neumaier-compensated sum of x_a x_b x_c x_d over canonical decompositions
    s = 0.0
    comp = 0.0
    for k in range(1, n // 2 + 1):
        m = n - k
        for ia in range(offsets[k], offsets[k + 1]):
            a = divs[ia]
            if a * a >= k:
                break
            b = k // a
            pab = x[a] * x[b]
            for ic in range(offsets[m], offsets[m + 1]):
                c = divs[ic]
                if c * c >= m:
                    break
                d = m // c
                if a == c or a == d or b == c or b == d:
                    continue
                if k == m and not (a < c or (a == c and b < d)):
                    continue
                v = pab * x[c] * x[d]
                t = s + v
                if abs(s) >= abs(v):
                    comp += (s - t) + v
                else:
                    comp += (v - t) + s
                s = t
    return s + comp


def _x_table(model, n):
    x = np.zeros(n + 1, dtype=np.float64)
    if n >= 1:
        x[1:] = model.probabilities(1, n + 1)
    return x


def mu_exact(model, n):
    """mu_n = E R(n) = sum over canonical decompositions of x_a x_b x_c x_d."""
    n = int(n)
    if n < 4:
        return 0.0
    D = _divs(n)
    return float(_mu_kernel(n, D.offsets, D.divs, _x_table(model, n)))


@numba.njit(cache=True, nogil=True)
def _ingham_kernel(n, tau):
    s = 0.0
    comp = 0.0
    conv = 0
    for k in range(1, n):
        tt = tau[k] * tau[n - k]
        conv += tt
        v = tt / math.sqrt(float(k) * float(n - k))
        t = s + v
        if abs(s) >= abs(v):
            comp += (s - t) + v
        else:
            comp += (v - t) + s
        s = t
    return s + comp, conv


def ingham_sum(n):
    """T_n = sum_{0<k<n} tau(k) tau(n-k) / sqrt(k (n-k))."""
    n = int(n)
    if n < 2:
        raise ValueError("n must be >= 2")
    return float(_ingham_kernel(n, _tau(n))[0])


def ingham_convolution(n):
    """sum_{0<k<n} tau(k) tau(n-k), exact."""
    n = int(n)
    if n < 2:
        raise ValueError("n must be >= 2")
    return int(_ingham_kernel(n, _tau(n))[1])


def mu_divisor_form(model, n):
    """c^4 / (8 ln(n+1)) * T_n, the divisor-sum form of mu_n."""
    n = int(n)
    if n < 4:
        raise ValueError("n must be >= 4")
    return model.c**4 / (8.0 * math.log(n + 1)) * ingham_sum(n)


@numba.njit(cache=True, nogil=True)
def _delta_kernel(decs, x, n):
    m = decs.shape[0]
    cnt = np.zeros(n + 2, dtype=np.int64)
    for i in range(m):
        for t in range(4):
            cnt[decs[i, t] + 1] += 1
    off = np.cumsum(cnt)
    pos = off[:-1].copy()
    idx = np.empty(off[-1], dtype=np.int64)
    for i in range(m):
        for t in range(4):
            e = decs[i, t]
            idx[pos[e]] = i
            pos[e] += 1
    mark = np.full(m, -1, dtype=np.int64)
    by_overlap = np.zeros(5, dtype=np.int64)
    s = 0.0
    comp = 0.0
    for i in range(m):
        a0 = decs[i, 0]
        a1 = decs[i, 1]
        a2 = decs[i, 2]
        a3 = decs[i, 3]
        pi = x[a0] * x[a1] * x[a2] * x[a3]
        for t in range(4):
            e = decs[i, t]
            for q in range(off[e], off[e + 1]):
                j = idx[q]
                if j <= i or mark[j] == i:
                    continue
                mark[j] = i
                shared = 0
                v = pi
                for u in range(4):
                    f = decs[j, u]
                    if f == a0 or f == a1 or f == a2 or f == a3:
                        shared += 1
                    else:
                        v *= x[f]
                by_overlap[shared] += 1
                tt = s + v
                if abs(s) >= abs(v):
                    comp += (s - tt) + v
                else:
                    comp += (v - tt) + s
                s = tt
    return s + comp, by_overlap


@dataclass
class DeltaResult:
    n: int
    delta: float
    pairs_by_overlap: dict  # shared-element count -> number of unordered pairs

    @property
    def pairs(self):
        return sum(self.pairs_by_overlap.values())


def delta_exact(model, n, cap=DEFAULT_DELTA_CAP, force=False):
    """Delta_n: sum over unordered pairs of distinct canonical decompositions
    sharing at least one value of the probability that all values in their
    union are selected."""
    n = int(n)
    if n > cap:
        if not force:
            raise ResourceLimitError(f"n={n} above delta cap {cap}; pass force=True to override")
        warnings.warn(f"delta_exact above cap ({n} > {cap}); runtime grows quadratically",
                      RuntimeWarning, stacklevel=2)
    decs = decompositions(n) if n >= 1 else np.empty((0, 4), dtype=np.int64)
    if decs.shape[0] < 2:
        return DeltaResult(n, 0.0, {1: 0, 2: 0, 3: 0})
    delta, by = _delta_kernel(decs, _x_table(model, n), n)
    res = {k: int(by[k]) for k in (1, 2, 3)}
    if by[4]:
        res[4] = int(by[4])
    return DeltaResult(n, float(delta), res)


def janson_bound(mu, delta):
    """exp(-mu + delta), clipped to 1 (a probability bound above 1 is vacuous)."""
    if mu < 0 or delta < 0:
        raise ValueError("mu and delta must be nonnegative")
    e = delta - mu
    return 1.0 if e >= 0 else math.exp(e)


@numba.njit(cache=True, nogil=True)
def _lem_sum(u, v):
    lo = math.ceil(0.5 - v)
    hi = math.floor(u - 0.5)
    s = 0.0
    for j in range(lo, hi + 1):
        s += 1.0 / math.sqrt((u - j) * (v + j))
    return s


def lem41_sum(u, v):
    """sum over integers j in [1/2 - v, u - 1/2] of 1/sqrt((u-j)(v+j))."""
    if not (u > 0 and v > 0):
        raise ValueError("u and v must be positive")
    return float(_lem_sum(float(u), float(v)))


@numba.njit(cache=True, nogil=True)
def lem41_max(us, vs):
    best = 0.0
    arg = -1
    for i in range(us.size):
        s = _lem_sum(us[i], vs[i])
        if s > best:
            best = s
            arg = i
    return best, arg


@dataclass
class SumIntegralCheck:
    passed: bool
    lhs: float
    rhs: float
    note: str = ""


def monotone_sum_integral_check(f, points, l, increasing=False, integral=None):
    """Check sum f(a_i) <= (1/l) * integral of f over the shifted hull.

    Decreasing f integrates over (min - l, max]; increasing f over
    [min, max + l).  Points must be pairwise l-separated.  ``integral``
    may supply an exact antiderivative-based integral(lo, hi); otherwise
    scipy quadrature is used and a non-convergent integral is treated as
    divergent (the check is then vacuous).
    """
    pts = sorted(float(p) for p in points)
    if not pts:
        return SumIntegralCheck(True, 0.0, 0.0, "no points")
    if l <= 0:
        raise ValueError("spacing l must be positive")
    gaps = np.diff(pts)
    if gaps.size and gaps.min() < l * (1 - 1e-12):
        raise ValueError(f"points are not {l}-separated (min gap {gaps.min()})")
    lhs = math.fsum(f(p) for p in pts)
    lo, hi = (pts[0], pts[-1] + l) if increasing else (pts[0] - l, pts[-1])
    note = ""
    if integral is not None:
        val = integral(lo, hi)
    else:
        from scipy import integrate

        with warnings.catch_warnings():
            warnings.simplefilter("error")
            try:
                val, _ = integrate.quad(f, lo, hi, limit=200)
            except (integrate.IntegrationWarning, ZeroDivisionError, RuntimeWarning):
                val = math.inf
    if not math.isfinite(val):
        note = "integral diverges; check is vacuous"
        return SumIntegralCheck(True, lhs, math.inf, note)
    rhs = val / l
    return SumIntegralCheck(lhs <= rhs * (1 + 1e-12), lhs, rhs, note)


@dataclass
class RepStats:
    n: int
    dec_count: int
    dec_count_strict: int
    R: int = None
    mu_exact: float = None
    mu_divisor_form: float = None
    delta: float = None
    janson: float = None
    overlap: dict = field(default_factory=dict)

    def row(self):
        return (self.n, self.dec_count, self.R, self.mu_exact, self.mu_divisor_form,
                self.delta, self.janson)


STATS_COLUMNS = ("n", "dec_count", "R_n", "mu_exact", "mu_divisor_form", "delta", "janson")


def rep_stats(n, model=None, A=None, with_delta=False, delta_cap=DEFAULT_DELTA_CAP, force=False):
    total, strict = decomposition_counts(n)
    st = RepStats(n, total, strict)
    if A is not None:
        st.R = rep_count(n, A)
    if model is not None and n >= 4:
        st.mu_exact = mu_exact(model, n)
        st.mu_divisor_form = mu_divisor_form(model, n)
        if with_delta:
            d = delta_exact(model, n, cap=delta_cap, force=force)
            st.delta = d.delta
            st.overlap = d.pairs_by_overlap
            st.janson = janson_bound(st.mu_exact, st.delta)
    return st


# Scanning every n in a range for R(n) >= 1 ---------------------------------


@numba.njit(cache=True, nogil=True)
def _pair_products(els, hi):
    cnt = 0
    for i in range(els.size):
        a = els[i]
        if a == 0:
            continue
        if a * a >= hi:
            break
        for j in range(i + 1, els.size):
            if a * els[j] > hi:
                break
            cnt += 1
    pa = np.empty(cnt, dtype=np.int64)
    pb = np.empty(cnt, dtype=np.int64)
    t = 0
    for i in range(els.size):
        a = els[i]
        if a == 0:
            continue
        if a * a >= hi:
            break
        for j in range(i + 1, els.size):
            if a * els[j] > hi:
                break
            pa[t] = a
            pb[t] = els[j]
            t += 1
    return pa, pb


@numba.njit(cache=True, nogil=True)
def _unrepresented(lo, hi, off, pa, pb, values):
    out = []
    for n in range(lo, hi + 1):
        found = False
        for h in values:
            if 2 * h > n:
                break
            k = n - h
            if off[k + 1] == off[k]:
                continue
            for p in range(off[h], off[h + 1]):
                a = pa[p]
                b = pb[p]
                for q in range(off[k], off[k + 1]):
                    c = pa[q]
                    d = pb[q]
                    if a != c and a != d and b != c and b != d:
                        found = True
                        break
                if found:
                    break
            if found:
                break
        if not found:
            out.append(n)
    return out


def unrepresented(A, lo, hi):
    """All n in [lo, hi] with R(n) = 0 under A (no distinct ab + cd = n)."""
    hi = int(hi)
    els = A.elements()
    els = els[(els >= 1) & (els <= hi)]
    pa, pb = _pair_products(els, hi)
    prod = pa * pb
    order = np.argsort(prod, kind="stable")
    pa, pb, prod = pa[order], pb[order], prod[order]
    off = np.zeros(hi + 2, dtype=np.int64)
    np.add.at(off, prod + 1, 1)
    off = np.cumsum(off)
    values = np.unique(prod)
    res = _unrepresented(int(lo), hi, off, pa, pb, values)
    return [int(v) for v in res]
