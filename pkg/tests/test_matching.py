import numpy as np
import pytest

from oracles import brute_force_match
from semreg.features import FeatureSet
from semreg.matching import MatchSet, match_all, match_class


def test_clear_nearest_neighbour():
    query = np.array([[1.0, 0.0]])
    refs = np.array([[0.99, 0.1], [0.0, 1.0]])
    out = match_class(query, refs)
    assert out == [(0, 0, pytest.approx(np.hypot(0.01, 0.1)))]


def test_equidistant_rejected():
    query = np.array([[0.0, 0.0]])
    refs = np.array([[1.0, 0.0], [-1.0, 0.0]])
    assert match_class(query, refs) == []


def test_ratio_boundary_strict():
    # d1/d2 exactly 0.7 must be rejected
    query = np.array([[0.0, 0.0]])
    refs = np.array([[0.7, 0.0], [1.0, 0.0]])
    assert match_class(query, refs, ratio=0.7) == []
    assert match_class(query, refs, ratio=0.7 + 1e-9) != []


def test_duplicate_references_rejected():
    query = np.array([[1.0, 1.0]])
    refs = np.array([[1.0, 1.0], [1.0, 1.0]])
    assert match_class(query, refs) == []


def test_tied_nearest_neighbours_are_ambiguous():
    # two references at the same distance give a ratio of exactly 1,
    # so the strict threshold rejects the match; the oracle agrees
    query = np.array([[0.0, 0.0]])
    refs = np.array([[1.0, 0.0], [1.0, 0.0], [5.0, 0.0]])
    assert match_class(query, refs) == []
    assert brute_force_match(query, refs, 0.7) == []


def test_needs_two_references():
    with pytest.raises(ValueError, match="at least 2"):
        match_class(np.ones((1, 2)), np.ones((1, 2)))


@pytest.mark.parametrize("seed", range(10))
def test_brute_force_oracle(seed):
    rng = np.random.default_rng(seed)
    nq, nr, c = rng.integers(2, 200), rng.integers(2, 200), 8
    query = rng.normal(size=(nq, c))
    refs = rng.normal(size=(nr, c))
    got = match_class(query, refs)
    want = brute_force_match(query, refs, 0.7)
    assert [(q, r) for q, r, _ in got] == [(q, r) for q, r, _ in want]
    assert np.allclose([d for _, _, d in got], [d for _, _, d in want])


def _feature_set(keypoints, descriptors, labels):
    kp = np.asarray(keypoints, dtype=np.float64)
    return FeatureSet(kp, np.asarray(descriptors, dtype=np.float64),
                      np.asarray(labels), 100, 100)


def _random_sets(seed, n_classes=3, n=30, c=6):
    rng = np.random.default_rng(seed)
    mk = lambda: _feature_set(rng.uniform(0, 100, (n, 2)),
                              rng.normal(size=(n, c)),
                              rng.integers(0, n_classes, n))
    return mk(), mk()


def test_self_match_at_distance_zero():
    rng = np.random.default_rng(0)
    desc = rng.normal(size=(10, 6)) * 5  # well separated
    kp = rng.uniform(0, 100, (10, 2))
    feats = _feature_set(kp, desc, np.zeros(10, dtype=int))
    ms = match_all(feats, feats)
    assert len(ms) == 10
    assert np.allclose(ms.distances, 0.0, atol=1e-9)
    assert np.allclose(ms.query_kp, ms.ref_kp)


def test_class_only_in_query_is_skipped():
    q = _feature_set([[1, 1], [2, 2]], [[1.0, 0.0], [0.0, 1.0]], [0, 5])
    r = _feature_set([[1, 1], [2, 2], [3, 3]],
                     [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]], [0, 0, 0])
    ms = match_all(q, r)
    assert 5 in ms.skipped_classes
    assert not (ms.class_ids == 5).any()


def test_pooled_counts_and_class_purity():
    q, r = _random_sets(42)
    ms = match_all(q, r)
    per_class = ms.counts_per_class
    assert sum(per_class.values()) == len(ms)
    # no pair joins different classes: every pair's class exists in both sets
    for cid in per_class:
        assert (q.labels == cid).any() and (r.labels == cid).any()


def test_determinism():
    q, r = _random_sets(7)
    a = match_all(q, r)
    b = match_all(q, r)
    assert np.array_equal(a.query_kp, b.query_kp)
    assert np.array_equal(a.ref_kp, b.ref_kp)
    assert np.array_equal(a.class_ids, b.class_ids)
    assert np.array_equal(a.distances, b.distances)


def test_output_ordered_by_class_then_query():
    q, r = _random_sets(3)
    ms = match_all(q, r)
    assert np.all(np.diff(ms.class_ids) >= 0)


def test_empty_result_is_valid():
    q = _feature_set([[1, 1]], [[1.0, 0.0]], [2])
    r = _feature_set([[1, 1], [2, 2]], [[1.0, 0.0], [0.0, 1.0]], [0, 0])
    ms = match_all(q, r)
    assert len(ms) == 0
    assert set(ms.skipped_classes) == {0, 2}


def test_dump_format():
    ms = MatchSet(np.array([[1.0, 2.0]]), np.array([[3.0, 4.0]]),
                  np.array([7]), np.array([0.5]))
    assert ms.dump() == "7 1.0 2.0 3.0 4.0 0.5"
