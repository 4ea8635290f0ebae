import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from sumprod.errors import ResourceLimitError
from sumprod.intset import interval, make_set
from sumprod.randmodel import RandomSetModel
from sumprod.repstats import (
    STATS_COLUMNS,
    decomposition_counts,
    decompositions,
    delta_exact,
    ingham_convolution,
    ingham_sum,
    janson_bound,
    lem41_max,
    lem41_sum,
    monotone_sum_integral_check,
    mu_divisor_form,
    mu_exact,
    rep_count,
    rep_stats,
    unrepresented,
)

HALF = RandomSetModel("S2S2", 0.5)
TWO = RandomSetModel("S2S2", 2.0)


def as_tuples(arr):
    return [tuple(int(v) for v in r) for r in arr]


def test_decomposition_examples():
    assert as_tuples(decompositions(10)) == [(1, 4, 2, 3)]
    assert as_tuples(decompositions(3)) == []
    assert as_tuples(decompositions(14, make_set([1, 2, 3, 4], 20))) == [(1, 2, 3, 4)]
    with pytest.raises(ValueError):
        decompositions(0)


def test_decompositions_match_loops_to_500():
    for n in range(1, 501):
        assert sorted(as_tuples(decompositions(n))) == oracles.decompositions(n), n


def test_canonical_invariants():
    for n in (97, 360, 1001):
        decs = as_tuples(decompositions(n))
        assert len(set(decs)) == len(decs)
        for a, b, c, d in decs:
            assert a < b and c < d and a * b <= c * d
            assert a * b + c * d == n and len({a, b, c, d}) == 4
            if a * b == c * d:
                assert (a, b) < (c, d)


def test_no_two_decompositions_share_a_multiset():
    for n in range(1, 2001):
        decs = decompositions(n)
        keys = {tuple(sorted(r)) for r in decs.tolist()}
        assert len(keys) == decs.shape[0], n


def test_ordered_count_is_eight_times_canonical():
    # an ordered tuple (a, b, c, d) may swap a<->b, c<->d and the two products
    for n in (30, 77, 128):
        ordered = 0
        for a in range(1, n):
            for b in range(1, n // a + 1):
                m = n - a * b
                for c in range(1, m + 1):
                    if m % c == 0 and len({a, b, c, m // c}) == 4:
                        ordered += 1
        assert ordered == 8 * decompositions(n).shape[0]


def test_strict_and_tied_counts():
    total, strict = decomposition_counts(2 * 12)
    tied = [r for r in as_tuples(decompositions(24)) if r[0] * r[1] == r[2] * r[3]]
    assert total - strict == len(tied) > 0


def test_rep_count():
    assert rep_count(14, make_set([1, 2, 3, 4], 20)) == 1
    assert rep_count(100, make_set([], 100)) == 0
    allowed = set(range(1, 51))
    assert rep_count(100, interval(1, 50)) == len(oracles.decompositions(100, allowed))


@given(st.lists(st.integers(1, 120), max_size=40), st.integers(1, 600))
def test_rep_count_restricted(a, n):
    A = make_set(a, 600)
    assert rep_count(n, A) == len(oracles.decompositions(n, set(a)))


def test_mu_values():
    x = [oracles.s2s2_prob(0.5, a) for a in (1, 2, 3, 4)]
    assert mu_exact(HALF, 10) == pytest.approx(math.prod(x), rel=1e-12)
    assert mu_exact(HALF, 10) == pytest.approx(0.01117, abs=1e-5)
    assert mu_exact(HALF, 3) == 0


def test_mu_matches_four_loop():
    for model in (HALF, TWO):
        x = lambda a, c=model.c: oracles.s2s2_prob(c, a)
        for n in range(4, 121, 7):
            want = oracles.mu_four_loop(x, n)
            assert mu_exact(model, n) == pytest.approx(want, rel=1e-9, abs=1e-300)


def test_divisor_form():
    assert ingham_sum(10) == pytest.approx(oracles.ingham_sum(10), rel=1e-12)
    assert ingham_sum(10) == pytest.approx(13.4447, abs=1e-3)
    want = 0.5**4 / (8 * math.log(11)) * oracles.ingham_sum(10)
    assert mu_divisor_form(HALF, 10) == pytest.approx(want, rel=1e-12)
    assert mu_divisor_form(HALF, 10) == pytest.approx(0.04380, abs=1e-5)
    ratio = mu_divisor_form(RandomSetModel("S2S2", 1.0), 500) / mu_divisor_form(HALF, 500)
    assert ratio == pytest.approx(16.0, rel=1e-12)


def test_divisor_form_ratio_reported():
    n = 10**5
    r = mu_divisor_form(HALF, n) / mu_exact(HALF, n)
    assert 0.1 < r < 10


def test_ingham():
    assert ingham_sum(2) == 1.0
    assert ingham_convolution(2) == 1
    assert ingham_convolution(10) == 58
    assert ingham_convolution(300) == sum(oracles.tau(k) * oracles.tau(300 - k) for k in range(1, 300))
    assert ingham_sum(1234) == pytest.approx(oracles.ingham_sum(1234), rel=1e-10)


def test_ingham_convolution_against_asymptotic():
    n = 10**5 + 3
    assert oracles.is_prime(n)
    sigma = 1 + 1 / n
    r = ingham_convolution(n) / (6 / math.pi**2 * n * math.log(n) ** 2 * sigma)
    assert 0.5 <= r <= 2.0


def test_delta_small():
    assert delta_exact(HALF, 10).delta == 0.0
    x = lambda a: oracles.s2s2_prob(0.5, a)
    for n in (22, 40, 63, 100):
        decs = oracles.decompositions(n)
        got = delta_exact(HALF, n)
        assert got.delta == pytest.approx(oracles.delta_pairs(x, decs), rel=1e-9)
        shared = Counter(len(set(p) & set(q)) for i, p in enumerate(decs) for q in decs[i + 1 :])
        shared.pop(0, None)
        assert {k: v for k, v in got.pairs_by_overlap.items() if v} == dict(shared)


def test_delta_cap():
    with pytest.raises(ResourceLimitError):
        delta_exact(HALF, 30000, cap=20000)
    with pytest.warns(RuntimeWarning):
        delta_exact(HALF, 60, cap=50, force=True)


@given(st.integers(1, 300))
def test_delta_nonnegative(n):
    d = delta_exact(TWO, n)
    assert d.delta >= 0
    if decompositions(n).shape[0] <= 1:
        assert d.delta == 0


def test_janson():
    assert janson_bound(5, 1) == pytest.approx(math.exp(-4))
    assert janson_bound(5, 1) == pytest.approx(0.018316, abs=1e-6)
    assert janson_bound(0, 0) == 1.0
    assert janson_bound(1, 3) == 1.0
    n = 10**6
    mu = 1.21 * math.log(n)
    b = janson_bound(mu, 0.3 * mu)
    assert math.log(b) / math.log(n) == pytest.approx(-0.847, abs=1e-3)
    with pytest.raises(ValueError):
        janson_bound(-1, 0)


def test_janson_monotone():
    r = np.random.default_rng(1)
    for _ in range(1000):
        mu, d = r.uniform(0, 50, 2)
        e = r.uniform(0, 5)
        assert janson_bound(mu, d + e) >= janson_bound(mu, d)
        assert janson_bound(mu + e, d) <= janson_bound(mu, d)


def test_lem41_values():
    assert lem41_sum(0.5, 0.5) == pytest.approx(2.0, abs=1e-12)
    assert lem41_sum(2, 1) == pytest.approx(math.sqrt(2), abs=1e-12)
    with pytest.raises(ValueError):
        lem41_sum(0, 1)


@given(st.floats(1e-6, 1e4), st.floats(1e-6, 1e4))
def test_lem41_matches_loop(u, v):
    assert lem41_sum(u, v) == pytest.approx(oracles.lem_sum(u, v), rel=1e-9)


def test_lem41_bounded():
    r = np.random.default_rng(2)
    us = 1e4 * (1 - r.random(10**5))
    vs = 1e4 * (1 - r.random(10**5))
    best, _ = lem41_max(us, vs)
    assert best <= 12


def test_sum_integral_examples():
    res = monotone_sum_integral_check(lambda u: 1 / u, range(1, 11), 1)
    assert res.passed and "diverges" in res.note
    res = monotone_sum_integral_check(lambda u: math.exp(-u), [0, 1, 2], 1)
    assert res.passed
    assert res.lhs == pytest.approx(1 + math.exp(-1) + math.exp(-2), abs=1e-12)
    assert res.rhs == pytest.approx(math.exp(1) - math.exp(-2), rel=1e-9)
    with pytest.raises(ValueError):
        monotone_sum_integral_check(lambda u: 1.0, [0, 0.5], 1)


def test_sum_integral_random_steps():
    r = np.random.default_rng(3)
    for _ in range(1000):
        k = int(r.integers(1, 12))
        levels = np.sort(r.uniform(0.01, 5, k))[::-1]
        edges = np.arange(k + 1, dtype=float)

        def f(u, levels=levels):
            i = min(max(int(math.ceil(u)) - 1, 0), k - 1)
            return levels[i]

        def integral(lo, hi, levels=levels):
            # f is levels[0] on (-inf, 1], levels[i] on (i, i+1]
            total = 0.0
            for i in range(k):
                a = -math.inf if i == 0 else edges[i]
                b = edges[i + 1] if i < k - 1 else math.inf
                seg = max(0.0, min(hi, b) - max(lo, a))
                total += seg * levels[i]
            return total

        l = float(r.uniform(0.5, 1.0))
        pts = np.cumsum(r.uniform(l, 2 * l, k)) - l
        pts = pts[pts <= k]
        if pts.size == 0:
            continue
        assert monotone_sum_integral_check(f, pts, l, integral=integral).passed


def test_increasing_variant():
    res = monotone_sum_integral_check(lambda u: u, [1, 2, 3], 1, increasing=True)
    assert res.passed and res.rhs == pytest.approx((16 - 1) / 2)


def test_rep_stats_row():
    st_ = rep_stats(10, HALF, make_set([1, 2, 3, 4], 10), with_delta=True)
    assert len(st_.row()) == len(STATS_COLUMNS)
    assert st_.R == 1 and st_.dec_count == 1 and st_.delta == 0.0
    assert st_.janson == pytest.approx(math.exp(-st_.mu_exact))


@given(st.lists(st.integers(1, 200), max_size=50), st.integers(1, 400))
def test_unrepresented_matches_rep_count(a, lo):
    A = make_set(a, 400)
    hi = min(400, lo + 80)
    want = [n for n in range(lo, hi + 1) if rep_count(n, A) == 0]
    assert unrepresented(A, lo, hi) == want
