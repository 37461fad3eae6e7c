"""Hoeffding tree (VFDT) with Gaussian naive Bayes leaves.

Nodes live in parallel arrays that double in size when full. Every node keeps
its Gaussian statistics: a leaf that splits turns into an internal node whose
statistics are frozen, and empty fresh leaves predict from the deepest ancestor
that has seen data.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from .core import (COUNTER_BYTES, REAL_BYTES, HoeffdingParams, NaiveBayesParams,
                   StreamClassifier, UsageError)
from .naive_bayes import gaussian_stats_bytes, nb_argmax, nb_update


def hoeffding_bound(value_range: float, delta: float, n: int) -> float:
    """Deviation bound sqrt(R^2 ln(1/delta) / (2n))."""
    if n < 1 or value_range <= 0 or not 0 < delta < 1:
        raise UsageError("hoeffding_bound needs n >= 1, R > 0 and delta in (0, 1)")
    return math.sqrt(value_range * value_range * math.log(1.0 / delta) / (2.0 * n))


# beyond this |z| the Gaussian CDF rounds to exactly 0 or 1 in double precision
_Z_SATURATE = 6.0


@njit(cache=True)
def _xlog2x(v):
    return v * math.log2(v) if v > 0.0 else 0.0


@njit(cache=True)
def best_split(counts, mean, m2, fmin, fmax, node, n_thresholds, var_floor):
    """Best (feature, threshold) at ``node`` by information gain.

    Returns ``(feature, threshold, best_gain, gap)`` where ``gap`` is the margin
    over the best candidate of any *other* feature (0 when there is only one).
    Feature is -1 when fewer than two classes have been seen.

    Entropies are evaluated as n*H = n log n - sum(v log v) so that classes
    falling entirely on one side of a threshold reuse a precomputed term.
    """
    n_classes = counts.shape[1]
    n_features = mean.shape[2]
    dist = np.empty(n_classes)
    dist_xlx = np.empty(n_classes)
    scale = np.empty(n_classes)
    total = 0.0
    sum_xlx = 0.0
    seen = 0
    for c in range(n_classes):
        dist[c] = counts[node, c]
        dist_xlx[c] = _xlog2x(dist[c])
        total += dist[c]
        sum_xlx += dist_xlx[c]
        if dist[c] > 0:
            seen += 1
    if seen < 2:
        return -1, 0.0, 0.0, 0.0
    h_parent = (_xlog2x(total) - sum_xlx) / total
    feat_gain = np.zeros(n_features)
    feat_thr = np.zeros(n_features)
    for f in range(n_features):
        lo = fmin[node, f]
        hi = fmax[node, f]
        if hi <= lo:
            continue
        for c in range(n_classes):
            var = m2[node, c, f] / dist[c] if dist[c] > 0.0 else 0.0
            # 0 marks a point mass: the class goes wholly left when mu <= t
            scale[c] = 0.0 if var < var_floor else 1.0 / math.sqrt(2.0 * var)
        best_g = -1.0
        for k in range(1, n_thresholds + 1):
            t = lo + (hi - lo) * k / (n_thresholds + 1)
            n_left = 0.0
            left_xlx = 0.0
            right_xlx = 0.0
            for c in range(n_classes):
                nc = dist[c]
                if nc == 0.0:
                    continue
                mu = mean[node, c, f]
                if scale[c] == 0.0:
                    z = _Z_SATURATE if mu <= t else -_Z_SATURATE
                else:
                    z = (t - mu) * scale[c]
                if z >= _Z_SATURATE:
                    n_left += nc
                    left_xlx += dist_xlx[c]
                elif z <= -_Z_SATURATE:
                    right_xlx += dist_xlx[c]
                else:
                    lc = nc * 0.5 * (1.0 + math.erf(z))
                    n_left += lc
                    left_xlx += _xlog2x(lc)
                    right_xlx += _xlog2x(nc - lc)
            n_right = total - n_left
            weighted = _xlog2x(n_left) - left_xlx + _xlog2x(n_right) - right_xlx
            g = h_parent - weighted / total
            if g > best_g:
                best_g = g
                feat_thr[f] = t
        feat_gain[f] = max(best_g, 0.0)
    best = 0
    for f in range(1, n_features):
        if feat_gain[f] > feat_gain[best]:
            best = f
    second = 0.0
    for f in range(n_features):
        if f != best and feat_gain[f] > second:
            second = feat_gain[f]
    return best, feat_thr[best], feat_gain[best], feat_gain[best] - second


@njit(cache=True)
def _route(feat, thr, left, right, x):
    node = 0
    while feat[node] >= 0:
        if x[feat[node]] <= thr[node]:
            node = left[node]
        else:
            node = right[node]
    return node


@njit(cache=True)
def ht_predict(feat, thr, left, right, seen, counts, mean, m2, x, var_floor):
    node = 0
    informed = 0
    while True:
        if seen[node] > 0:
            informed = node
        if feat[node] < 0:
            break
        if x[feat[node]] <= thr[node]:
            node = left[node]
        else:
            node = right[node]
    return nb_argmax(counts, mean, m2, informed, x, var_floor)


@njit(cache=True)
def ht_train(feat, thr, left, right, seen, since, counts, mean, m2, fmin, fmax, meta, x, label,
             grace, delta, tie_epsilon, value_range, n_thresholds, var_floor):
    """Route, update the leaf and attempt a split every ``grace`` arrivals.

    ``meta[0]`` holds the node count; the caller guarantees two free slots.
    Returns 1 when the leaf was split.
    """
    node = _route(feat, thr, left, right, x)
    if seen[node] == 0:
        for f in range(x.shape[0]):
            fmin[node, f] = x[f]
            fmax[node, f] = x[f]
    else:
        for f in range(x.shape[0]):
            if x[f] < fmin[node, f]:
                fmin[node, f] = x[f]
            if x[f] > fmax[node, f]:
                fmax[node, f] = x[f]
    nb_update(counts, mean, m2, node, x, label)
    seen[node] += 1
    since[node] += 1
    if since[node] < grace:
        return 0
    since[node] = 0
    f, t, gain, gap = best_split(counts, mean, m2, fmin, fmax, node, n_thresholds, var_floor)
    if f < 0 or gain <= 0.0:
        return 0
    n = seen[node]
    eps = math.sqrt(value_range * value_range * math.log(1.0 / delta) / (2.0 * n))
    if not (gap > eps or eps < tie_epsilon):
        return 0
    a = meta[0]
    b = a + 1
    meta[0] = a + 2
    feat[node] = f
    thr[node] = t
    left[node] = a
    right[node] = b
    return 1


@njit(cache=True)
def ht_block(feat, thr, left, right, seen, since, counts, mean, m2, fmin, fmax, meta, X, y,
             grace, delta, tie_epsilon, value_range, n_thresholds, var_floor, out):
    splits = 0
    for i in range(X.shape[0]):
        out[i] = ht_predict(feat, thr, left, right, seen, counts, mean, m2, X[i], var_floor)
        splits += ht_train(feat, thr, left, right, seen, since, counts, mean, m2, fmin, fmax, meta,
                           X[i], y[i], grace, delta, tie_epsilon, value_range, n_thresholds,
                           var_floor)
    return splits


class HoeffdingTree(StreamClassifier):
    """Incremental decision tree splitting leaves once the Hoeffding bound allows it."""

    name = "ht"

    def __init__(self, n_features, n_classes, params: HoeffdingParams = HoeffdingParams(),
                 nb_params: NaiveBayesParams = NaiveBayesParams(), initial_capacity: int = 64):
        super().__init__(n_features, n_classes)
        self.params = params
        self.var_floor = nb_params.var_floor
        self.value_range = math.log2(n_classes)
        self.meta = np.array([1], dtype=np.int64)
        self.splits = 0
        self._allocate(max(initial_capacity, 3))

    def _allocate(self, capacity):
        d, c = self.n_features, self.n_classes
        fresh = {
            "feat": np.full(capacity, -1, dtype=np.int64),
            "thr": np.zeros(capacity),
            "left": np.zeros(capacity, dtype=np.int64),
            "right": np.zeros(capacity, dtype=np.int64),
            "seen": np.zeros(capacity, dtype=np.int64),
            "since": np.zeros(capacity, dtype=np.int64),
            "counts": np.zeros((capacity, c), dtype=np.int64),
            "mean": np.zeros((capacity, c, d)),
            "m2": np.zeros((capacity, c, d)),
            "fmin": np.zeros((capacity, d)),
            "fmax": np.zeros((capacity, d)),
        }
        if hasattr(self, "feat"):
            used = int(self.meta[0])
            for key, arr in fresh.items():
                arr[:used] = getattr(self, key)[:used]
        for key, arr in fresh.items():
            setattr(self, key, arr)
        self.capacity = capacity

    def _predict(self, x):
        return ht_predict(self.feat, self.thr, self.left, self.right, self.seen, self.counts,
                          self.mean, self.m2, x, self.var_floor)

    def _train(self, x, label):
        if self.meta[0] + 2 > self.capacity:
            self._allocate(2 * self.capacity)
        p = self.params
        self.splits += ht_train(self.feat, self.thr, self.left, self.right, self.seen, self.since,
                                self.counts, self.mean, self.m2, self.fmin, self.fmax, self.meta,
                                x, label, p.grace_period, p.delta, p.tie_epsilon,
                                self.value_range, p.n_thresholds, self.var_floor)

    def _prequential_block(self, X, y, out):
        # each element splits at most one leaf, i.e. allocates at most two nodes
        needed = int(self.meta[0]) + 2 * X.shape[0]
        if needed > self.capacity:
            cap = self.capacity
            while cap < needed:
                cap *= 2
            self._allocate(cap)
        p = self.params
        self.splits += ht_block(self.feat, self.thr, self.left, self.right, self.seen, self.since,
                                self.counts, self.mean, self.m2, self.fmin, self.fmax, self.meta,
                                X, y, p.grace_period, p.delta, p.tie_epsilon, self.value_range,
                                p.n_thresholds, self.var_floor, out)

    # --- introspection -------------------------------------------------

    @property
    def n_nodes(self) -> int:
        return int(self.meta[0])

    @property
    def n_leaves(self) -> int:
        return (self.n_nodes + 1) // 2

    def depth(self) -> int:
        def walk(node):
            if self.feat[node] < 0:
                return 0
            return 1 + max(walk(self.left[node]), walk(self.right[node]))
        return walk(0)

    def internal_nodes(self):
        """(node, feature, threshold) for every internal node."""
        return [(i, int(self.feat[i]), float(self.thr[i]))
                for i in range(self.n_nodes) if self.feat[i] >= 0]

    def leaf_of(self, x) -> int:
        return int(_route(self.feat, self.thr, self.left, self.right, self._as_features(x)))

    def best_split(self, node: int = 0):
        return best_split(self.counts, self.mean, self.m2, self.fmin, self.fmax, node,
                          self.params.n_thresholds, self.var_floor)

    def leaf_record_bytes(self) -> int:
        d = self.n_features
        return gaussian_stats_bytes(d, self.n_classes) + 2 * d * REAL_BYTES + 2 * COUNTER_BYTES

    @staticmethod
    def internal_record_bytes() -> int:
        return REAL_BYTES + 3 * COUNTER_BYTES

    def memory_bytes(self) -> int:
        # every node keeps a statistics record; internal nodes add their split record
        return self.n_nodes * self.leaf_record_bytes() + self.splits * self.internal_record_bytes()
