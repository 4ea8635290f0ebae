"""Randomized partial additive complements and one level of the thin
almost sum-product basis.

P is a set of primes placed so that P^2 is evenly spread over
[eps N^(1/3), 2N]; B is a random complement drawn with probabilities
10 eps^-1 a^(-2/3) and accepted only when its size and its coverage
defect profile are both within the stated bounds.
"""

import math

import numpy as np

from .. import rng
from ..errors import ConstructionError
from ..intset import IntSet, interval, make_set, product_set, sumset
from ..randmodel import NEOLEM, RandomSetModel
from ..sieve import sieve_primes
from .basic import ConstructionManifest

# keeps complement draws independent of sample_set's stream 0
NEOLEM_STREAM = 0x4E454F

GRID_X = 32
GRID_M = 32


def hypothesis_threshold_n(eps):
    """The size 10^5 eps^(-9/2) that n must exceed."""
    return 1e5 * eps ** -4.5


def _prefix_counts(A, top):
    m = np.zeros(top + 1, dtype=np.int64)
    k = min(top, A.capacity)
    m[: k + 1] = A.mask()[: k + 1]
    return np.cumsum(m)


def neolem_hypothesis_check(A, n, eps, samples=2000, seed=0, relax=False):
    """Test |A ∩ [m-2x, m-x]| > eps x^(2/3) ln(n/x) for x in [n^(1/3), eps n]
    and m in [2x, 2x/eps].

    The scan covers a geometric grid of x times a linear grid of m, then
    ``samples`` random (x, m) pairs.  Returns a dict report; ``first_failure``
    is the first failing point in scan order and ``worst`` the point of least
    margin (count minus threshold).
    """
    n = int(n)
    if not 0 < eps < 0.5:
        raise ValueError("eps must lie in (0, 1/2)")
    below = n <= hypothesis_threshold_n(eps)
    if below and not relax:
        raise ValueError(f"n={n} does not exceed 1e5 eps^-4.5 = {hypothesis_threshold_n(eps):.4g}; "
                         "pass relax=True for an advisory check")
    xlo = math.ceil(n ** (1 / 3))
    xhi = math.floor(eps * n)
    if xlo > xhi:
        raise ValueError("empty x range [n^(1/3), eps n]")
    top = int(2 * xhi / eps) + 1
    C = _prefix_counts(A, top)

    xs = np.unique(np.rint(np.geomspace(xlo, xhi, GRID_X)).astype(np.int64))
    gx, gm = [], []
    for x in xs:
        ms = np.unique(np.rint(np.linspace(2 * x, math.floor(2 * x / eps), GRID_M)).astype(np.int64))
        gx.append(np.full(ms.size, x))
        gm.append(ms)
    r = np.random.default_rng([seed, NEOLEM_STREAM])
    rx = np.rint(np.exp(r.uniform(math.log(xlo), math.log(xhi), samples))).astype(np.int64)
    rx = np.clip(rx, xlo, xhi)
    rm = np.floor(2 * rx + r.uniform(0, 1, samples) * (np.floor(2 * rx / eps) - 2 * rx + 1))
    xs_all = np.concatenate(gx + [rx])
    ms_all = np.concatenate(gm + [rm.astype(np.int64)])

    lo = ms_all - 2 * xs_all
    hi = ms_all - xs_all
    counts = C[hi] - np.where(lo > 0, C[np.maximum(lo - 1, 0)], 0)
    thresh = eps * xs_all ** (2 / 3) * np.log(n / xs_all)
    margin = counts - thresh
    fails = np.flatnonzero(margin <= 0)
    w = int(np.argmin(margin))

    def point(i):
        return {"x": int(xs_all[i]), "m": int(ms_all[i]), "count": int(counts[i]),
                "threshold": float(thresh[i]), "margin": float(margin[i])}

    return {
        "passed": bool(fails.size == 0),
        "advisory": bool(below),
        "n": n, "eps": eps, "checked": int(xs_all.size),
        "grid_points": int(xs_all.size - samples), "samples": int(samples), "seed": int(seed),
        "failures": int(fails.size),
        "first_failure": point(int(fails[0])) if fails.size else None,
        "worst": point(w),
        "worst_ratio": float(counts[w] / thresh[w]) if thresh[w] > 0 else math.inf,
    }


def complement_range(n, eps):
    """[ceil(n^(1/3)), floor(2 eps n)]."""
    return math.ceil(n ** (1 / 3)), math.floor(2 * eps * n)


def neolem_model(eps):
    return RandomSetModel(NEOLEM, 10.0 / eps, 1.0)


def dyadic_t_grid(n):
    """t = 2 n^(1/3) 2^i up to 2n, with 2n itself appended."""
    t0 = math.ceil(2 * n ** (1 / 3))
    ts = []
    t = t0
    while t < 2 * n:
        ts.append(t)
        t *= 2
    ts.append(2 * n)
    return ts


def defect_profile(S, start, ts):
    """Rows (t, missing_count, missing_fraction) for [start, t] \\ S."""
    top = max(ts)
    m = np.zeros(top + 1, dtype=bool)
    k = min(top, S.capacity)
    m[: k + 1] = S.mask()[: k + 1]
    miss = np.cumsum(~m)
    before = miss[start - 1] if start > 0 else 0
    rows = []
    for t in ts:
        c = int(miss[t] - before)
        rows.append((int(t), c, c / t))
    return rows


def _draw(model, lo, hi, seed):
    u = rng.uniforms(seed, lo, hi + 1, stream=NEOLEM_STREAM)
    keep = np.flatnonzero(u < model.probabilities(lo, hi + 1)) + lo
    return keep


def neolem_complement(A, n, eps, seed=0, max_retries=4, relax=False):
    """Random B ⊂ [n^(1/3), 2 eps n] with |B| <= 2 lambda and
    |[2n^(1/3), t] \\ (A+B)| <= eps t on the dyadic t grid.

    Draw i uses seed + i; at most ``max_retries`` draws are made.  The
    returned IntSet carries every attempt in its manifest.
    """
    n = int(n)
    if not 0 < eps < 0.5:
        raise ValueError("eps must lie in (0, 1/2)")
    if max_retries < 1:
        raise ValueError("max_retries must be >= 1")
    lo, hi = complement_range(n, eps)
    model = neolem_model(eps)
    clamped = model.clamped_upto()
    if clamped >= lo and not relax:
        raise ValueError(f"y_a >= 1 for a in [{lo}, {clamped}]; pass relax=True to clamp")
    lam = math.fsum(model.probabilities(lo, hi + 1))
    ts = dyadic_t_grid(n)
    start = ts[0]
    attempts = []
    for i in range(max_retries):
        s = int(seed) + i
        B = make_set(_draw(model, lo, hi, s), hi)
        prof = defect_profile(sumset(A, B, 2 * n), start, ts)
        worst = max(r[2] / eps for r in prof)
        ok = len(B) <= 2 * lam and worst <= 1.0
        attempts.append({"seed": s, "size": len(B), "worst_defect_ratio": worst, "accepted": ok})
        if ok:
            m = ConstructionManifest(
                "neolem-complement", {"eps": eps, "N": n, "seed": s},
                notes={"lambda": lam, "range": [lo, hi], "clamped_upto": clamped,
                       "advisory": bool(clamped >= lo), "attempts": attempts,
                       "defect_profile": [list(r) for r in prof]})
            return B.with_meta({"manifest": m.to_json()})
    worst = min(a["worst_defect_ratio"] for a in attempts)
    raise ConstructionError(
        f"all {max_retries} draws rejected; best worst-defect ratio {worst:.4g}",
        {"attempts": attempts, "lambda": lam, "worst_defect_ratio": worst})


def thm53_j_max(eps, N):
    """ceil(ln N^(2/3) / ln eps^-1) - 1."""
    return math.ceil(math.log(N ** (2 / 3)) / math.log(1 / eps)) - 1


def thm53_quota(eps, N, j):
    """ceil(2 sqrt(eps (eps^(j+2) N)^(2/3) ln eps^-(j+1)))."""
    return math.ceil(2 * math.sqrt(eps * (eps ** (j + 2) * N) ** (2 / 3) * (j + 1) * math.log(1 / eps)))


def thm53_intervals(eps, N):
    """(j, r, lo, hi) for I_{j,r} = [r eps^(j+2) N / 2, (r+1) eps^(j+2) N / 2]."""
    out = []
    for j in range(thm53_j_max(eps, N) + 1):
        step = eps ** (j + 2) * N / 2
        for r in range(math.ceil(2 / eps), math.floor(4 / eps**2) + 1):
            out.append((j, r, r * step, (r + 1) * step))
    return out


def thm53_primes(eps, N, strict=True):
    """Smallest quota(j) primes from each square-root image of I_{j,r}.

    With strict=True a short image raises ConstructionError naming it;
    otherwise every available prime is taken and the shortfall recorded.
    """
    top = math.isqrt(2 * N) + 2
    table = sieve_primes(top)
    chosen = set()
    rows = []
    short = []
    for j, r, lo, hi in thm53_intervals(eps, N):
        q = thm53_quota(eps, N, j)
        plo, phi = math.sqrt(lo), math.sqrt(hi)
        avail = table.between(math.ceil(plo) - 1, math.floor(phi))
        take = avail[:q]
        chosen.update(int(p) for p in take)
        rows.append({"j": j, "r": r, "quota": q, "available": int(avail.size)})
        if avail.size < q:
            rec = {"j": j, "r": r, "sqrt_interval": [plo, phi], "quota": q,
                   "available": int(avail.size)}
            if strict:
                raise ConstructionError(
                    f"square-root image [{plo:.2f}, {phi:.2f}] of I_{{{j},{r}}} holds "
                    f"{avail.size} primes, quota {q}", {"shortfall": rec})
            short.append(rec)
    return sorted(chosen), rows, short


def build_thm53_level(eps, N, seed=0, strict=True, max_retries=4, relax=True, samples=2000):
    """One level N of the almost-basis construction: returns (P, B, report).

    P^2 is checked against the complement hypothesis and B is drawn by
    ``neolem_complement`` with A = P^2.
    """
    if not 0 < eps < 0.5:
        raise ValueError("eps must lie in (0, 1/2)")
    N = int(N)
    primes, rows, short = thm53_primes(eps, N, strict)
    P = make_set(primes, N)
    P2 = product_set(P, P, 2 * N)
    hyp = neolem_hypothesis_check(P2, N, eps, samples, seed, relax)
    report = {
        "eps": eps, "N": N, "seed": seed, "J": thm53_j_max(eps, N),
        "P_size": len(P), "shortfalls": short, "intervals": len(rows),
        "quota_j": {j: thm53_quota(eps, N, j) for j in range(thm53_j_max(eps, N) + 1)},
        "hypothesis": hyp,
        "P_constant": len(P) / (eps ** (-5 / 6) * math.sqrt(math.log(1 / eps)) * N ** (1 / 3)),
    }
    try:
        B = neolem_complement(P2, N, eps, seed, max_retries, relax)
    except ConstructionError as e:
        report["complement"] = e.report
        raise ConstructionError(str(e), report) from None
    bm = B.meta["manifest"]
    report.update({"B_size": len(B), "lambda": bm["notes"]["lambda"],
                   "attempts": bm["notes"]["attempts"], "seed_used": bm["params"]["seed"],
                   "defect_profile": bm["notes"]["defect_profile"]})
    mp = ConstructionManifest("thm53-level", {"eps": eps, "N": N, "seed": seed},
                              hypothesis_report=hyp, notes={"strict": int(strict)})
    return P.with_meta({"manifest": mp.to_json()}), B, report


def glue_level(P, B, N):
    """{0, 1} ∪ [N^(1/9), N^(1/3)] ∪ P ∪ B: a single level of A_0."""
    N = int(N)
    lo = math.ceil(N ** (1 / 9))
    hi = math.floor(N ** (1 / 3) + 1e-9)
    cap = max(N, P.capacity, B.capacity)
    A = interval(lo, hi, cap).union(make_set([0, 1], cap), cap)
    return A.union(P, cap).union(B, cap)
