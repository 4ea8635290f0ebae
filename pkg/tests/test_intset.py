import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from sumprod.errors import FormatError, ResourceLimitError
from sumprod.intset import (
    IntSet,
    count_upto,
    deserialize,
    dilate,
    interval,
    load,
    make_set,
    pair_count_upto,
    power_set_k,
    product_set,
    save,
    serialize,
    sumset,
)
from sumprod.constructions import dyadic_T
from sumprod.sieve import sieve_primes


def els(A):
    return set(A.elements().tolist())


small_sets = st.lists(st.integers(0, 300), max_size=60)


def test_make_set_counts():
    A = make_set([2, 4, 8], 10)
    assert count_upto(A, 5) == 2
    assert count_upto(make_set([], 10), 10) == 0
    assert count_upto(make_set([0], 10), 10) == 0
    assert 0 in make_set([0], 10)


def test_make_set_rejects_out_of_range():
    with pytest.raises(ValueError, match="11"):
        make_set([1, 11], 10)
    with pytest.raises(ValueError):
        make_set([-1], 10)


def test_count_upto_range():
    A = make_set([1, 2], 10)
    assert count_upto(A, 0) == 0
    with pytest.raises(ValueError):
        count_upto(A, 11)


def test_count_upto_dyadic():
    assert count_upto(dyadic_T(21), 21) == 8


def test_count_upto_vectorized():
    A = make_set([1, 5, 64, 65, 127, 128], 200)
    X = np.arange(201)
    want = [oracles.count_upto([1, 5, 64, 65, 127, 128], x) for x in X]
    assert count_upto(A, X).tolist() == want


def test_sumset_examples():
    assert els(sumset(make_set([0, 1], 10), make_set([0, 2], 10), 10)) == {0, 1, 2, 3}
    assert len(sumset(make_set([], 10), make_set([1, 2], 10), 10)) == 0
    A = interval(1, 5)
    assert els(sumset(A, A, 6)) == {2, 3, 4, 5, 6}


def test_product_set_examples():
    assert els(product_set(make_set([2, 3], 100), make_set([3, 5], 100), 100)) == {6, 9, 10, 15}
    B = make_set([3, 7, 50], 100)
    P = product_set(make_set([0, 1], 100), B, 100)
    assert 0 in P and {3, 7, 50} <= els(P)


def test_power_set_examples():
    A = make_set([1, 2], 10)
    assert els(power_set_k(A, 2, 10)) == {1, 2, 4}
    assert power_set_k(A, 1, 10) == A
    assert els(power_set_k(make_set([2, 3], 30), 3, 30)) == {8, 12, 18, 27}
    with pytest.raises(ValueError):
        power_set_k(A, 0, 10)


def test_pair_count_examples():
    A = make_set([1, 2, 3], 10)
    assert pair_count_upto(A, A, 6) == 8
    assert pair_count_upto(make_set([], 10), A, 6) == 0


def test_pair_count_primes():
    p = sieve_primes(1000).primes
    A = make_set(p, 10**6)
    # every prime pair with product <= 10^6, counted by a sorted two-pointer pass
    want = sum(int(np.searchsorted(p, 10**6 // q, side="right")) for q in p)
    assert pair_count_upto(A, A, 10**6) == want


def test_dilate():
    assert els(dilate(make_set([0, 1, 3], 10), 3, 10)) == {0, 3, 9}


@given(small_sets, small_sets, st.integers(0, 300))
def test_sumset_matches_loops(a, b, limit):
    A, B = make_set(a, 300), make_set(b, 300)
    assert els(sumset(A, B, limit)) == oracles.sumset(set(a), set(b), limit)


@given(small_sets, small_sets, st.integers(0, 300))
def test_product_matches_loops(a, b, limit):
    A, B = make_set(a, 300), make_set(b, 300)
    assert els(product_set(A, B, limit)) == oracles.product_set(set(a), set(b), limit)
    assert els(product_set(A, A, limit)) == oracles.product_set(set(a), set(a), limit)


@given(st.lists(st.integers(0, 30), max_size=12), st.integers(1, 4), st.integers(0, 2000))
def test_power_matches_loops(a, k, limit):
    A = make_set(a, 30)
    assert els(power_set_k(A, k, limit)) == oracles.power(set(a), k, limit)


@given(small_sets, small_sets, st.integers(0, 300))
def test_pair_count_matches_loops(a, b, X):
    A, B = make_set(a, 300), make_set(b, 300)
    assert pair_count_upto(A, B, X) == oracles.pair_count(set(a), set(b), X)


@given(small_sets, st.lists(st.integers(0, 300), min_size=1, max_size=20))
def test_count_upto_is_prefix_popcount(a, xs):
    A = make_set(a, 300)
    for X in xs:
        assert count_upto(A, X) == oracles.count_upto(set(a), X)


@given(small_sets)
def test_count_upto_monotone(a):
    A = make_set(a, 300)
    c = count_upto(A, np.arange(301))
    assert np.all(np.diff(c) >= 0)
    assert np.all(c <= np.arange(301))


@given(st.lists(st.integers(0, 5000), max_size=200), st.integers(0, 64))
def test_roundtrip(a, pad):
    A = make_set(a, 5000 + pad)
    B = deserialize(serialize(A))
    assert B == A and B.capacity == A.capacity


def test_roundtrip_empty_and_large(tmp_path):
    E = make_set([], 0)
    assert deserialize(serialize(E)) == E
    r = np.random.default_rng(5)
    A = IntSet.from_mask(r.random(2 * 10**6 + 1) < 0.5)
    data = save(A, tmp_path / "a.spb")
    B = load(tmp_path / "a.spb")
    assert B == A and len(A) > 10**5
    import hashlib
    assert hashlib.sha256(serialize(B)).digest() == hashlib.sha256(data).digest()


def test_spb1_layout():
    data = serialize(make_set([0, 3, 64], 64))
    assert data[:4] == b"SPB1"
    n = int.from_bytes(data[4:8], "little")
    body = data[8 + n :]
    assert len(body) == 16
    assert int.from_bytes(body[:8], "little") == 0b1001
    assert int.from_bytes(body[8:], "little") == 1


def test_deserialize_errors():
    good = serialize(make_set([1, 2], 100))
    with pytest.raises(FormatError):
        deserialize(b"XXXX" + good[4:])
    with pytest.raises(FormatError):
        deserialize(good[:-3])
    with pytest.raises(FormatError):
        deserialize(good[:10])
    with pytest.raises(FormatError):
        deserialize(good + b"\0")


def test_capacity_cap(monkeypatch):
    monkeypatch.setenv("SUMPROD_MAX_CAPACITY", "1000")
    with pytest.raises(ResourceLimitError):
        make_set([1], 5000)


def test_immutable():
    A = make_set([1, 2], 10)
    with pytest.raises(ValueError):
        A.words[0] = 0
