"""Measurement baselines: the no-op empty classifier and an offline kNN reference."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .core import KnnParams, StreamClassifier, UsageError
from .evaluation import macro_f1_score


class EmptyClassifier(StreamClassifier):
    """Always predicts class 0 and learns nothing."""

    name = "empty"

    def _predict(self, x):
        return 0

    def _train(self, x, label):
        pass

    def _prequential_block(self, X, y, out):
        out[:] = 0

    def memory_bytes(self):
        return 0


def _vote(neighbor_labels: np.ndarray, n_classes: int) -> np.ndarray:
    # argmax returns the first maximum, i.e. the lowest class id on ties
    votes = np.zeros((neighbor_labels.shape[0], n_classes), dtype=np.int64)
    rows = np.repeat(np.arange(neighbor_labels.shape[0]), neighbor_labels.shape[1])
    np.add.at(votes, (rows, neighbor_labels.ravel()), 1)
    return votes.argmax(axis=1)


@dataclass
class KnnModel:
    X: np.ndarray
    y: np.ndarray
    k: int
    n_classes: int

    def __post_init__(self):
        self.X = np.ascontiguousarray(self.X, dtype=np.float64)
        self.y = np.asarray(self.y, dtype=np.int64)
        if not 1 <= self.k <= len(self.y):
            raise UsageError(f"k={self.k} must lie in [1, {len(self.y)}]")
        self._tree = cKDTree(self.X)

    def neighbors(self, Xq: np.ndarray, k: int) -> np.ndarray:
        """Indices of the ``k`` nearest stored points per query.

        Candidates are ranked by (distance, class); a few extra neighbours are
        fetched so exact distance ties at the boundary resolve by class.
        """
        Xq = np.atleast_2d(np.asarray(Xq, dtype=np.float64))
        extra = min(k + 8, len(self.y))
        dist, idx = self._tree.query(Xq, k=extra)
        dist = dist.reshape(len(Xq), extra)
        idx = idx.reshape(len(Xq), extra)
        order = np.lexsort((self.y[idx], dist), axis=1)
        return np.take_along_axis(idx, order, axis=1)[:, :k]

    def predict_many(self, Xq) -> np.ndarray:
        return _vote(self.y[self.neighbors(Xq, self.k)], self.n_classes)

    def predict(self, x) -> int:
        return int(self.predict_many(np.asarray(x, dtype=np.float64)[None, :])[0])


def knn_fit_gridsearch(X_train, y_train, X_val, y_val, n_classes: int, k_range=(2, 20)):
    """Pick k in ``k_range`` maximising validation macro-F1 (ties go to the smallest k).

    Returns the fitted model and a list of ``(k, f1)`` grid results.
    """
    lo, hi = k_range
    if len(y_train) == 0 or len(y_val) == 0:
        raise UsageError("training and validation splits must be non-empty")
    if len(y_train) < lo:
        raise UsageError(f"training split has {len(y_train)} points, fewer than k={lo}")
    hi = min(hi, len(y_train))
    probe = KnnModel(X_train, y_train, hi, n_classes)
    neigh_labels = probe.y[probe.neighbors(X_val, hi)]
    results = []
    best_k, best_f1 = lo, -1.0
    for k in range(lo, hi + 1):
        f1 = macro_f1_score(y_val, _vote(neigh_labels[:, :k], n_classes), n_classes)
        results.append((k, f1))
        if f1 > best_f1:
            best_k, best_f1 = k, f1
    return KnnModel(X_train, y_train, best_k, n_classes), results


def offline_knn_evaluate(stream, params: KnnParams = KnnParams()):
    """Offline reference: random train split, grid-searched k, macro-F1 on the rest.

    Returns ``(f1, model)``.
    """
    n = len(stream)
    rng = np.random.default_rng(params.seed)
    perm = rng.permutation(n)
    n_train = max(int(round(params.train_fraction * n)), 2)
    train_idx, eval_idx = perm[:n_train], perm[n_train:]
    n_val = max(int(round(params.validation_fraction * n_train)), 1)
    val_idx, fit_idx = train_idx[:n_val], train_idx[n_val:]
    X, y, c = stream.X, stream.y, stream.spec.num_classes
    selected, _ = knn_fit_gridsearch(X[fit_idx], y[fit_idx], X[val_idx], y[val_idx], c,
                                     params.k_range)
    model = KnnModel(X[train_idx], y[train_idx], selected.k, c)
    f1 = macro_f1_score(y[eval_idx], model.predict_many(X[eval_idx]), c)
    return f1, model
