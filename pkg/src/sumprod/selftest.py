"""Embedded oracle suites run by ``sumprod selftest``.

Each suite compares a fast kernel against a plain loop on random small
inputs.  ``inject`` swaps a deliberately broken kernel into one suite so
the harness itself can be shown to catch a wrong answer.
"""

import itertools
import math
import time
from dataclasses import dataclass

import numpy as np

from . import intset as S
from . import repstats as R
from .randmodel import RandomSetModel

SUITES = ("intset", "repstats", "lem41")


@dataclass
class SuiteResult:
    name: str
    passed: bool
    checks: int
    detail: str
    seconds: float


def _rand_set(r, cap, density=None):
    d = r.uniform(0.02, 0.5) if density is None else density
    return S.make_set(np.flatnonzero(r.random(cap + 1) < d), cap)


def brute_sumset(a, b, limit):
    return {x + y for x in a for y in b if x + y <= limit}


def brute_product(a, b, limit):
    return {x * y for x in a for y in b if x * y <= limit}


def brute_power(a, k, limit):
    return {math.prod(t) for t in itertools.product(sorted(a), repeat=k) if math.prod(t) <= limit}


def brute_pairs(a, b, X):
    return sum(1 for x in a for y in b if x >= 1 and y >= 1 and x * y <= X)


def brute_decompositions(n):
    """Canonical (a, b, c, d) by scanning every split n = k + (n - k)."""
    out = []
    for k in range(1, n):
        for a in range(1, math.isqrt(k) + 1):
            if k % a:
                continue
            b = k // a
            if a >= b:
                continue
            m = n - k
            for c in range(1, math.isqrt(m) + 1):
                if m % c:
                    continue
                d = m // c
                if c >= d or len({a, b, c, d}) < 4:
                    continue
                if k < m or (k == m and (a, b) < (c, d)):
                    out.append((a, b, c, d))
    return sorted(out)


def brute_mu(model, n):
    """Sum over ordered distinct 4-tuples with ab + cd = n, divided by 8."""
    x = {a: float(model.probabilities(a, a + 1)[0]) for a in range(1, n + 1)}
    total = math.fsum(
        x[a] * x[b] * x[c] * x[d]
        for a in range(1, n) for b in range(1, n // a + 1) if a * b < n
        for c in range(1, n - a * b + 1) if (n - a * b) % c == 0
        for d in [(n - a * b) // c]
        if len({a, b, c, d}) == 4
    )
    return total / 8


def _broken_sumset(A, B, limit):
    out = S.sumset(A, B, limit)
    els = out.elements()
    return S.make_set(els[:-1], limit) if els.size else out


def suite_intset(seed=0, trials=200, inject=False):
    r = np.random.default_rng(seed)
    sumset = _broken_sumset if inject else S.sumset
    checks = 0
    for _ in range(trials):
        cap = int(r.integers(1, 200))
        A, B = _rand_set(r, cap), _rand_set(r, cap)
        a, b = set(A.elements().tolist()), set(B.elements().tolist())
        lim = int(r.integers(0, cap + 1))
        if set(sumset(A, B, lim).elements().tolist()) != brute_sumset(a, b, lim):
            return False, checks, f"sumset mismatch (cap={cap}, limit={lim})"
        if set(S.product_set(A, B, lim).elements().tolist()) != brute_product(a, b, lim):
            return False, checks, f"product_set mismatch (cap={cap}, limit={lim})"
        k = int(r.integers(1, 4))
        small = {v for v in a if v <= 40}
        P = S.power_set_k(S.make_set(sorted(small), cap), k, lim)
        if set(P.elements().tolist()) != brute_power(small, k, lim):
            return False, checks, f"power_set_k mismatch (k={k}, limit={lim})"
        X = int(r.integers(0, cap + 1))
        if S.pair_count_upto(A, B, X) != brute_pairs(a, b, X):
            return False, checks, f"pair_count_upto mismatch (cap={cap}, X={X})"
        if S.count_upto(A, X) != sum(1 for v in a if 1 <= v <= X):
            return False, checks, "count_upto mismatch"
        if S.deserialize(S.serialize(A)) != A:
            return False, checks, "SPB1 round trip changed the set"
        checks += 6
    return True, checks, "ok"


def suite_repstats(seed=0, n_max=120, inject=False):
    checks = 0
    for n in range(1, n_max + 1):
        got = [tuple(int(v) for v in row) for row in R.decompositions(n)]
        if inject and got:
            got = got[1:]
        if sorted(got) != brute_decompositions(n):
            return False, checks, f"decompositions({n}) mismatch"
        checks += 1
    model = RandomSetModel("S2S2", 0.5)
    for n in range(4, 61):
        want = brute_mu(model, n)
        got = R.mu_exact(model, n)
        if abs(got - want) > 1e-9 * max(1.0, abs(want)):
            return False, checks, f"mu_exact({n}) = {got!r}, loop gives {want!r}"
        checks += 1
    return True, checks, "ok"


def suite_lem41(seed=0, trials=10_000, inject=False):
    r = np.random.default_rng(seed)
    us = r.uniform(0, 1e4, trials)
    vs = r.uniform(0, 1e4, trials)
    us[us == 0] = 1e-9
    vs[vs == 0] = 1e-9
    worst = R.lem41_max(us, vs)[0] * (7.0 if inject else 1.0)
    if worst > 12:
        return False, trials, f"max sum {worst:.6f} exceeds 12"
    for (u, v), want in (((0.5, 0.5), 2.0), ((2.0, 1.0), math.sqrt(2))):
        if abs(R.lem41_sum(u, v) - want) > 1e-9:
            return False, trials, f"lem41_sum{(u, v)} != {want}"
    return True, trials + 2, f"max {worst:.6f}"


_RUNNERS = {"intset": suite_intset, "repstats": suite_repstats, "lem41": suite_lem41}


def run_selftest(suites=SUITES, inject=None, seed=0):
    """Run the named suites; ``inject`` names a suite to break on purpose."""
    if inject is not None and inject not in _RUNNERS:
        raise ValueError(f"unknown suite {inject!r}")
    out = []
    for name in suites:
        t = time.perf_counter()
        ok, n, detail = _RUNNERS[name](seed=seed, inject=(name == inject))
        out.append(SuiteResult(name, ok, n, detail, time.perf_counter() - t))
    return out

