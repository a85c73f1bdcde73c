import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import dense_jaccard
from wmhash import rng
from wmhash.baselines import (
    EMPTY_HASH,
    MERSENNE_61,
    IoffeHash,
    UnweightedSet,
    ioffe_hash,
    ioffe_sketch,
    ioffe_values,
    minwise_unweighted,
    minwise_values,
    mulmod61,
    reduce_to_unweighted,
    reduction_sketch,
    universal_hash,
)
from wmhash.config import SchemeConfig
from wmhash.errors import DomainError, UsageError
from wmhash.estimate import estimate_from_sketches
from wmhash.vectors import SparseVector


def _vec(rng_, d=30, dim=100):
    idx = np.sort(rng_.choice(dim, d, replace=False))
    return SparseVector(idx, rng_.uniform(0.05, 9.0, d), dim)


def test_ioffe_deterministic(rng):
    x = _vec(rng)
    assert ioffe_hash(x, 3, 17) == ioffe_hash(x, 3, 17)
    h = ioffe_hash(x, 3, 17)
    assert h.k_star in x.indices.tolist()


def test_ioffe_scalar_matches_vector(rng):
    x = _vec(rng)
    vec = ioffe_values(x, 40, 99)
    scal = [ioffe_hash(x, i, 99) for i in range(40)]
    assert [IoffeHash(int(a), int(b)) for a, b in vec] == scal


def test_ioffe_blocks_do_not_change_values(rng, monkeypatch):
    import wmhash.baselines as b

    x = _vec(rng, d=50)
    whole = ioffe_values(x, 64, 1)
    monkeypatch.setattr(b, "_BLOCK", 100)
    assert np.array_equal(whole, ioffe_values(x, 64, 1))


def test_ioffe_self_similarity(rng):
    x = _vec(rng)
    cfg = SchemeConfig(scheme="ioffe", k=500, master_seed=4)
    s = ioffe_sketch(x, cfg)
    assert s.values.shape == (500, 2)
    assert estimate_from_sketches(s, ioffe_sketch(x, cfg)).j_hat == 1.0


def test_ioffe_disjoint_never_collides():
    x = SparseVector.from_pairs([(i, 1.0 + i) for i in range(10)], 20)
    y = SparseVector.from_pairs([(i, 2.0) for i in range(10, 20)], 20)
    cfg = SchemeConfig(scheme="ioffe", k=10_000, master_seed=8)
    assert estimate_from_sketches(ioffe_sketch(x, cfg), ioffe_sketch(y, cfg)).j_hat == 0.0


def test_ioffe_collision_law(rng):
    x = _vec(rng, d=20, dim=30)
    y = SparseVector(x.indices, x.weights * rng.uniform(0.5, 1.5, x.nnz), 30)
    j = dense_jaccard(x, y)
    k = 10_000
    cfg = SchemeConfig(scheme="ioffe", k=k, master_seed=21)
    est = estimate_from_sketches(ioffe_sketch(x, cfg), ioffe_sketch(y, cfg)).j_hat
    assert abs(est - j) < 3 * np.sqrt(j * (1 - j) / k)


def test_ioffe_empty():
    with pytest.raises(UsageError):
        ioffe_hash(SparseVector.from_pairs([], 3), 0, 0)


def test_reduce_integer_weight():
    x = SparseVector.from_pairs([(0, 3.0)], 1)
    for seed in range(20):
        assert reduce_to_unweighted(x, seed).as_set() == {(1, 0), (2, 0), (3, 0)}


def test_reduce_fraction_frequency():
    x = SparseVector.from_pairs([(0, 0.5)], 1)
    hits = sum(reduce_to_unweighted(x, s).as_set() == {(1, 0)} for s in range(10_000))
    assert abs(hits / 10_000 - 0.5) < 0.016


def test_reduce_empty():
    assert len(reduce_to_unweighted(SparseVector.from_pairs([], 4), 1)) == 0


@given(st.dictionaries(st.integers(0, 30), st.floats(0.01, 12)), st.integers(0, 2**64 - 1))
def test_reduce_levels_bounded(d, seed):
    x = SparseVector.from_pairs(d.items(), 31)
    S = reduce_to_unweighted(x, seed)
    elems = S.as_set()
    assert len(elems) == len(S)
    for level, j in elems:
        assert 1 <= level <= np.ceil(d[j])
    for j, w in d.items():
        assert sum(1 for _, c in elems if c == j) in (int(np.floor(w)), int(np.floor(w)) + 1)


p61 = st.integers(0, MERSENNE_61 - 1)


@given(st.lists(st.tuples(p61, p61), min_size=1, max_size=30))
def test_mulmod61_matches_python_ints(pairs):
    a = np.array([p[0] for p in pairs], dtype=np.uint64)
    b = np.array([p[1] for p in pairs], dtype=np.uint64)
    assert mulmod61(a, b).tolist() == [(x * y) % MERSENNE_61 for x, y in pairs]


def test_mulmod61_extremes():
    top = MERSENNE_61 - 1
    assert int(mulmod61(np.uint64(top), np.uint64(top))) == (top * top) % MERSENNE_61


@given(p61, p61, st.integers(1, MERSENNE_61 - 1))
def test_universal_hash_formula(key, b, a):
    got = universal_hash(np.array([key], dtype=np.uint64), np.uint64(a), np.uint64(b))
    assert int(got[0]) == (a * key + b) % MERSENNE_61


def test_minwise_examples():
    S = reduce_to_unweighted(SparseVector.from_pairs([(2, 3.0), (5, 1.0)], 8), 0)
    assert minwise_unweighted(S, 4, 10) == minwise_unweighted(S, 4, 10)
    single = UnweightedSet(np.array([2]), np.array([7]), 8)
    key = 2 * 8 + 7
    h = minwise_unweighted(single, 0, 10)
    assert h == int(minwise_values(single, 1, 10)[0])
    assert h < MERSENNE_61
    assert key < MERSENNE_61
    assert minwise_values(S, 10, 3).tolist() == [minwise_unweighted(S, i, 3) for i in range(10)]


def test_minwise_empty_sentinel():
    empty = UnweightedSet(np.zeros(0, np.int64), np.zeros(0, np.int64), 4)
    assert minwise_unweighted(empty, 0, 0) == EMPTY_HASH
    assert np.all(minwise_values(empty, 5, 0) == EMPTY_HASH)


def test_key_width_check():
    S = UnweightedSet(np.array([2**40]), np.array([0]), 2**22)
    with pytest.raises(DomainError):
        S.keys()


def test_reduction_identical_integer_vectors():
    x = SparseVector.from_pairs([(0, 3.0), (4, 2.0), (9, 7.0)], 10)
    y = SparseVector.from_pairs([(0, 3.0), (4, 2.0), (9, 7.0)], 10)
    for k in (1, 17, 300):
        cfg = SchemeConfig(scheme="reduction", k=k, master_seed=k)
        assert estimate_from_sketches(reduction_sketch(x, cfg), reduction_sketch(y, cfg)).j_hat == 1.0


def test_reduction_integer_collision_law(rng):
    x = SparseVector(np.arange(20), rng.integers(1, 6, 20).astype(float), 20)
    y = SparseVector(np.arange(20), rng.integers(1, 6, 20).astype(float), 20)
    j = dense_jaccard(x, y)
    k = 10_000
    cfg = SchemeConfig(scheme="reduction", k=k, master_seed=2)
    est = estimate_from_sketches(reduction_sketch(x, cfg), reduction_sketch(y, cfg)).j_hat
    assert abs(est - j) < 3 * np.sqrt(j * (1 - j) / k)
