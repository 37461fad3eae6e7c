"""Gaussian naive Bayes over running per-class feature statistics.

The kernels operate on one row of a (rows, classes, ...) statistics table so the
Hoeffding tree can reuse them for its leaf learners.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from .core import COUNTER_BYTES, REAL_BYTES, NaiveBayesParams, StreamClassifier

_LOG_2PI = math.log(2.0 * math.pi)


@njit(cache=True)
def nb_update(counts, mean, m2, row, x, label):
    """Welford update of the Gaussian statistics of ``label`` in table row ``row``."""
    counts[row, label] += 1
    n = counts[row, label]
    for f in range(x.shape[0]):
        delta = x[f] - mean[row, label, f]
        mean[row, label, f] += delta / n
        m2[row, label, f] += delta * (x[f] - mean[row, label, f])


@njit(cache=True)
def nb_log_scores(counts, mean, m2, row, x, var_floor, out):
    total = 0
    for c in range(counts.shape[1]):
        total += counts[row, c]
    for c in range(counts.shape[1]):
        n = counts[row, c]
        if n == 0:
            out[c] = -np.inf
            continue
        s = math.log(n / total)
        for f in range(x.shape[0]):
            var = m2[row, c, f] / n
            if var < var_floor:
                var = var_floor
            d = x[f] - mean[row, c, f]
            s -= 0.5 * (_LOG_2PI + math.log(var) + d * d / var)
        out[c] = s


@njit(cache=True)
def nb_argmax(counts, mean, m2, row, x, var_floor):
    best = 0
    best_score = -np.inf
    total = 0
    for c in range(counts.shape[1]):
        total += counts[row, c]
    if total == 0:
        return 0
    for c in range(counts.shape[1]):
        n = counts[row, c]
        if n == 0:
            continue
        s = math.log(n / total)
        for f in range(x.shape[0]):
            var = m2[row, c, f] / n
            if var < var_floor:
                var = var_floor
            d = x[f] - mean[row, c, f]
            s -= 0.5 * (_LOG_2PI + math.log(var) + d * d / var)
        if s > best_score:
            best_score = s
            best = c
    return best


@njit(cache=True)
def nb_block(counts, mean, m2, X, y, var_floor, out):
    for i in range(X.shape[0]):
        out[i] = nb_argmax(counts, mean, m2, 0, X[i], var_floor)
        nb_update(counts, mean, m2, 0, X[i], y[i])


def gaussian_stats_bytes(n_features: int, n_classes: int) -> int:
    """Bytes of one statistics table: class counters plus mean and M2 per (class, feature)."""
    return n_classes * COUNTER_BYTES + n_classes * n_features * 2 * REAL_BYTES


class NaiveBayes(StreamClassifier):
    """Gaussian naive Bayes with constant space.

    Priors are raw relative class frequencies; variances are population
    variances floored at ``var_floor`` when scoring.
    """

    name = "nb"

    def __init__(self, n_features, n_classes, params: NaiveBayesParams = NaiveBayesParams()):
        super().__init__(n_features, n_classes)
        self.params = params
        self.counts = np.zeros((1, n_classes), dtype=np.int64)
        self.mean = np.zeros((1, n_classes, n_features))
        self.m2 = np.zeros((1, n_classes, n_features))

    def _predict(self, x):
        return nb_argmax(self.counts, self.mean, self.m2, 0, x, self.params.var_floor)

    def _train(self, x, label):
        nb_update(self.counts, self.mean, self.m2, 0, x, label)

    def _prequential_block(self, X, y, out):
        nb_block(self.counts, self.mean, self.m2, X, y, self.params.var_floor, out)

    def log_scores(self, x) -> np.ndarray:
        """Per-class log prior plus Gaussian log-likelihood (``-inf`` for unseen classes)."""
        out = np.empty(self.n_classes)
        nb_log_scores(self.counts, self.mean, self.m2, 0, self._as_features(x),
                      self.params.var_floor, out)
        return out

    def class_counts(self) -> np.ndarray:
        return self.counts[0].copy()

    def means(self) -> np.ndarray:
        return self.mean[0].copy()

    def variances(self) -> np.ndarray:
        """Population variance per (class, feature); zero for unseen classes."""
        n = self.counts[0][:, None].astype(np.float64)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(n > 0, self.m2[0] / np.maximum(n, 1), 0.0)

    def priors(self) -> np.ndarray:
        total = self.counts[0].sum()
        return self.counts[0] / total if total else np.zeros(self.n_classes)

    def memory_bytes(self) -> int:
        return gaussian_stats_bytes(self.n_features, self.n_classes)
