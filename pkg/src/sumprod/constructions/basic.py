"""Deterministic constructions: the dyadic set, prime-interval sets and the
thin bases built from them with greedy additive complements."""

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ..errors import ConstructionError
from ..intset import make_set, power_set_k, product_set, sumset
from ..sieve import sieve_primes
from .lorentz import lorentz_complement

KINDS = ("dyadic", "prime-interval", "lorentz", "thm-ub", "alphabeta", "thm53-level")


@dataclass
class ConstructionManifest:
    kind: str
    params: dict
    hypothesis_report: dict = None
    notes: dict = field(default_factory=dict)

    def to_json(self):
        d = asdict(self)
        if d["hypothesis_report"] is None:
            del d["hypothesis_report"]
        return d


def _attach(A, manifest):
    return A.with_meta({"manifest": manifest.to_json()})


def dyadic_T(limit, include_zero=True):
    """{2} together with all sums of distinct powers of 4, cut at limit."""
    limit = int(limit)
    if limit < 2:
        raise ValueError("limit must be >= 2")
    vals = np.zeros(1, dtype=np.int64)
    p = 1
    while p <= limit:
        more = vals + p
        vals = np.concatenate([vals, more[more <= limit]])
        p *= 4
    vals = np.append(vals, 2)
    if not include_zero:
        vals = vals[vals != 0]
    m = ConstructionManifest("dyadic", {"N": limit, "include_zero": int(include_zero)})
    return _attach(make_set(vals, limit), m)


def block_quota(l, alpha):
    """floor(2^(l/2) / (2 ln(2^l)^alpha)) primes for the block (2^l, 2^(l+1)]."""
    return math.floor(2 ** (l / 2) / (2 * (l * math.log(2)) ** alpha))


def prime_interval_set(alpha, limit, l0=1, table=None):
    """Smallest block_quota(l) primes of every dyadic block (2^l, 2^(l+1)], l >= l0.

    Blocks with zero quota, or with fewer primes than their quota, are
    skipped and listed in the manifest.
    """
    limit = int(limit)
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    if l0 < 1:
        raise ValueError("l0 must be >= 1 (ln 2^0 = 0)")
    top = 1
    while (1 << top) < limit:
        top += 1
    # the last block may straddle limit; sieve its full extent to test the quota
    table = table if table is not None and table.limit >= (1 << top) else sieve_primes(1 << top)
    chosen = []
    skipped = []
    blocks = []
    for l in range(l0, top):
        lo, hi = 1 << l, 1 << (l + 1)
        if lo >= limit:
            break
        q = block_quota(l, alpha)
        avail = table.between(lo, hi)
        if q == 0:
            skipped.append({"l": l, "quota": 0, "available": int(avail.size), "reason": "zero quota"})
            continue
        if avail.size < q:
            skipped.append({"l": l, "quota": q, "available": int(avail.size),
                            "reason": "insufficient primes"})
            continue
        pick = avail[:q]
        blocks.append({"l": l, "quota": q})
        chosen.append(pick[pick <= limit])
    els = np.concatenate(chosen) if chosen else np.zeros(0, dtype=np.int64)
    m = ConstructionManifest("prime-interval", {"alpha": alpha, "N": limit, "l0": l0},
                             notes={"skipped_blocks": skipped, "blocks": blocks})
    return _attach(make_set(els, limit), m)


def alpha_k(k):
    """(k - 2) / (k + 1): log-saving exponent for A^k + A."""
    return (k - 2) / (k + 1)


def covering_start(S, limit):
    """Least n0 with [n0, limit] inside S (limit + 1 if limit itself is missing)."""
    missing = np.flatnonzero(~S.mask()[: limit + 1])
    return 0 if missing.size == 0 else int(missing[-1]) + 1


LORENTZ_START = 256


def build_thm_ub(k, limit, l0=1, start=None):
    """A = P1 ∪ B with P1 the prime-interval set for alpha(k) and B a greedy
    complement of P1^k; the manifest records n0 from an exhaustive scan of
    A^k + A.

    The greedy cover starts at ``start`` (default: max(min P1^k, 256)).
    Starting at the very bottom makes B fill most of [0, 64], where P1^k
    has almost nothing to offer; A^k + A still covers from a small n0.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    limit = int(limit)
    alpha = alpha_k(k)
    P1 = prime_interval_set(alpha, limit, l0)
    Pk = power_set_k(P1, k, limit)
    if len(Pk) < 2:
        raise ConstructionError("P1^k has fewer than two elements below limit")
    lowest = int(Pk.elements()[0])
    start = max(lowest, min(LORENTZ_START, limit)) if start is None else max(lowest, int(start))
    lor = lorentz_complement(Pk, limit, start)
    A = P1.union(lor.B, capacity=limit)
    S = sumset(power_set_k(A, k, limit), A, limit)
    n0 = covering_start(S, limit)
    m = ConstructionManifest(
        "thm-ub", {"k": k, "alpha": alpha, "N": limit, "l0": l0, "start": start},
        notes={"n0": n0, "P1_size": len(P1), "B_size": len(lor.B), "lorentz_start": start,
               "lorentz_constant": lor.fitted_constant,
               "lorentz_profile": [list(r) for r in lor.profile],
               "P1_skipped_blocks": P1.meta["manifest"]["notes"]["skipped_blocks"]})
    return _attach(A, m)


def check_alphabeta(alpha, beta, x1):
    """Raise ValueError naming the first violated parameter inequality."""
    checks = [
        (0 <= 1 - beta, "0 <= 1 - beta"),
        (1 - beta <= alpha + 1e-12, "1 - beta <= alpha"),
        (alpha <= beta + 1e-12, "alpha <= beta"),
        (beta < 1, "beta < 1"),
        (alpha >= 1 / 3 - 1e-12, "alpha >= 1/3"),
        (x1 >= 64, "x1 >= 64"),
    ]
    for ok, name in checks:
        if not ok:
            raise ValueError(f"parameter inequality violated: {name} "
                             f"(alpha={alpha}, beta={beta}, x1={x1})")


def alphabeta_generations(alpha, beta, x1, limit):
    """(x_i, y_i) for every generation with x_i < limit; x_{i+1} = x_i^7."""
    gens = []
    x = int(x1)
    while x < limit:
        nxt = x**7
        gens.append((x, nxt ** (alpha / beta)))
        x = nxt
    return gens


def build_alphabeta(alpha, beta, x1, limit):
    """A1 = P1 ∪ {0, 1} with primes placed in (x_i, y_i] at block quotas
    (2^(j+1) x_i)^beta (ln x_i)^(1/3) (implied constant 1), then
    A = A1 ∪ greedy complement of A1^2 from 0."""
    check_alphabeta(alpha, beta, x1)
    limit = int(limit)
    gens = alphabeta_generations(alpha, beta, x1, limit)
    table = sieve_primes(max(limit, 2))
    chosen = []
    blocks = []
    for x, y in gens:
        jmax = math.floor(math.log2(y / x)) - 1
        lx = math.log(x)
        for j in range(1, jmax + 1):
            lo, hi = (1 << j) * x, (1 << (j + 1)) * x
            if lo >= limit:
                break
            q = math.floor(hi**beta * lx ** (1 / 3))
            avail = table.between(lo, min(hi, y, limit))
            take = avail[:q]
            blocks.append({"x": x, "j": j, "quota": q, "placed": int(take.size),
                           "shortfall": max(0, q - int(avail.size)) if hi <= limit else None})
            chosen.append(take)
    els = np.concatenate(chosen + [np.array([0, 1], dtype=np.int64)])
    A1 = make_set(els, limit)
    A1sq = product_set(A1, A1, limit)
    lor = lorentz_complement(A1sq, limit, 0)
    A = A1.union(lor.B, capacity=limit)
    m = ConstructionManifest(
        "alphabeta", {"alpha": alpha, "beta": beta, "x1": x1, "N": limit},
        notes={"generations": len(gens), "generation_bounds": [[x, y] for x, y in gens],
               "blocks": blocks, "A1_size": len(A1), "B_size": len(lor.B),
               "lorentz_constant": lor.fitted_constant})
    return _attach(A, m)
