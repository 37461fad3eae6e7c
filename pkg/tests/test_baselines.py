import numpy as np
import pytest

from streambench.baselines import EmptyClassifier, KnnModel, knn_fit_gridsearch, offline_knn_evaluate
from streambench.core import ArrayStream, KnnParams, UsageError
from streambench.evaluation import prequential_run

from conftest import blobs


def test_empty_classifier():
    clf = EmptyClassifier(3, 4)
    assert clf.predict([1.0, 2.0, 3.0]) == 0
    clf.train([1.0, 2.0, 3.0], 3)
    assert clf.predict([9.0, 9.0, 9.0]) == 0
    assert clf.memory_bytes() == 0


def test_empty_classifier_perfect_on_all_zero_stream():
    X = np.random.default_rng(0).normal(size=(500, 2))
    stream = ArrayStream(X, np.zeros(500, dtype=int), 3)
    assert prequential_run(EmptyClassifier(2, 3), stream).final_macro_f1 == 1.0


def brute_knn(X, y, q, k, n_classes):
    d = np.sqrt(((X - q) ** 2).sum(axis=1))
    order = sorted(range(len(y)), key=lambda i: (d[i], y[i]))[:k]
    votes = np.bincount(y[order], minlength=n_classes)
    return int(np.argmax(votes))


def test_k1_returns_nearest_label():
    X = np.array([[0.0, 0.0], [5.0, 5.0], [1.0, 0.0]])
    model = KnnModel(X, np.array([2, 1, 0]), 1, 3)
    assert model.predict([4.0, 4.0]) == 1
    assert model.predict([1.0, 0.0]) == 0
    assert model.predict([0.0, 0.0]) == 2


def test_knn_matches_exhaustive_scan():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(300, 3))
    X[250:] = X[:50]                       # exact duplicates create distance ties
    y = rng.integers(0, 4, 300)
    Q = np.concatenate([rng.normal(size=(150, 3)), X[:50]])
    for k in (1, 2, 5, 11):
        model = KnnModel(X, y, k, 4)
        got = model.predict_many(Q)
        want = [brute_knn(X, y, q, k, 4) for q in Q]
        assert got.tolist() == want


def test_knn_permutation_invariant():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(200, 2))
    y = rng.integers(0, 3, 200)
    Q = rng.normal(size=(100, 2))
    perm = rng.permutation(200)
    a = KnnModel(X, y, 7, 3).predict_many(Q)
    b = KnnModel(X[perm], y[perm], 7, 3).predict_many(Q)
    assert np.array_equal(a, b)


def test_gridsearch_separated_blobs():
    s = blobs(600, centers=[[0, 0], [6, 6]], scale=0.7, seed=3)
    X, y = s.X, s.y
    model, grid = knn_fit_gridsearch(X[:400], y[:400], X[400:], y[400:], 2)
    assert [k for k, _ in grid] == list(range(2, 21))
    assert dict(grid)[model.k] > 0.95


def test_gridsearch_single_class():
    X = np.random.default_rng(4).normal(size=(60, 2))
    y = np.zeros(60, dtype=int)
    model, grid = knn_fit_gridsearch(X[:40], y[:40], X[40:], y[40:], 1)
    assert all(f1 == 1.0 for _, f1 in grid)
    assert model.k == 2


def test_gridsearch_all_tied_picks_two():
    s = blobs(200, centers=[[0, 0], [20, 20]], scale=0.1, seed=5)
    X, y = s.X, s.y
    model, grid = knn_fit_gridsearch(X[:100], y[:100], X[100:], y[100:], 2)
    assert len({f1 for _, f1 in grid}) == 1
    assert model.k == 2


def test_gridsearch_errors():
    X = np.zeros((1, 2))
    with pytest.raises(UsageError):
        knn_fit_gridsearch(X, [0], X, [0], 1)
    with pytest.raises(UsageError):
        knn_fit_gridsearch(np.zeros((5, 2)), np.zeros(5, int), np.zeros((0, 2)), [], 1)
    with pytest.raises(UsageError):
        KnnModel(np.zeros((3, 2)), np.zeros(3, int), 4, 1)


def test_offline_evaluate_on_blobs():
    stream = blobs(3000, centers=[[0, 0], [5, 0], [0, 5]], scale=0.8, seed=6)
    f1, model = offline_knn_evaluate(stream, KnnParams(seed=1))
    assert f1 > 0.95
    assert len(model.y) == 300
    again, _ = offline_knn_evaluate(stream, KnnParams(seed=1))
    assert again == f1
