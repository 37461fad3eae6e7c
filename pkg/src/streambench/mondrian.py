"""Memory-bounded online Mondrian forest.

All trees allocate nodes from one arena whose capacity is fixed by the byte
budget. Trees grow through the online Mondrian extension: a point falling
outside a node's bounding box may insert a new split above that node, at a
split time drawn from an exponential whose rate is the total gap between the
point and the box. Once fewer than two arena slots remain, trees stop growing
and only boxes and class counts are updated.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from .core import COUNTER_BYTES, REAL_BYTES, MondrianParams, StreamClassifier, UsageError

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0


@njit(cache=True)
def _uniform(state):
    """splitmix64 step mapped to [0, 1)."""
    state[0] += _GOLDEN
    z = state[0]
    z = (z ^ (z >> _S30)) * _MIX1
    z = (z ^ (z >> _S27)) * _MIX2
    z = z ^ (z >> _S31)
    return (z >> _S11) * _INV53


def new_rng_state(seed: int) -> np.ndarray:
    return np.random.SeedSequence(seed).generate_state(1, dtype=np.uint64)


@njit(cache=True)
def sample_split(lo, hi, state):
    """Feature with probability proportional to its range, value uniform within it.

    Returns ``(-1, 0.0)`` when every range is zero.
    """
    total = 0.0
    for f in range(lo.shape[0]):
        total += hi[f] - lo[f]
    if total <= 0.0:
        return -1, 0.0
    target = _uniform(state) * total
    acc = 0.0
    feature = lo.shape[0] - 1
    for f in range(lo.shape[0]):
        acc += hi[f] - lo[f]
        if target < acc and hi[f] > lo[f]:
            feature = f
            break
    while hi[feature] <= lo[feature]:
        feature -= 1
    value = lo[feature] + _uniform(state) * (hi[feature] - lo[feature])
    return feature, value


@njit(cache=True)
def mf_train(lower, upper, counts, feat, val, tau, left, right, parent, roots, meta, state,
             x, label, budget):
    n_features = x.shape[0]
    capacity = feat.shape[0]
    gap_lo = np.empty(n_features)
    gap_hi = np.empty(n_features)
    for t in range(roots.shape[0]):
        j = roots[t]
        if meta[1 + t] == 0:
            # first point of this tree: the root box collapses onto it
            for f in range(n_features):
                lower[j, f] = x[f]
                upper[j, f] = x[f]
            counts[j, label] += 1
            meta[1 + t] = 1
            continue
        tau_parent = 0.0
        while True:
            rate = 0.0
            for f in range(n_features):
                if x[f] < lower[j, f]:
                    gap_lo[f] = x[f]
                    gap_hi[f] = lower[j, f]
                elif x[f] > upper[j, f]:
                    gap_lo[f] = upper[j, f]
                    gap_hi[f] = x[f]
                else:
                    gap_lo[f] = 0.0
                    gap_hi[f] = 0.0
                rate += gap_hi[f] - gap_lo[f]
            if rate > 0.0:
                e = -math.log(1.0 - _uniform(state)) / rate
                if tau_parent + e < tau[j] and meta[0] + 2 <= capacity:
                    f_split, v = sample_split(gap_lo, gap_hi, state)
                    p = meta[0]
                    leaf = p + 1
                    meta[0] += 2
                    for f in range(n_features):
                        lower[p, f] = min(lower[j, f], x[f])
                        upper[p, f] = max(upper[j, f], x[f])
                        lower[leaf, f] = x[f]
                        upper[leaf, f] = x[f]
                    for c in range(counts.shape[1]):
                        counts[p, c] = counts[j, c]
                        counts[leaf, c] = 0
                    counts[p, label] += 1
                    counts[leaf, label] = 1
                    feat[p] = f_split
                    val[p] = v
                    tau[p] = tau_parent + e
                    feat[leaf] = -1
                    tau[leaf] = budget
                    if x[f_split] < lower[j, f_split]:
                        left[p] = leaf
                        right[p] = j
                    else:
                        left[p] = j
                        right[p] = leaf
                    grand = parent[j]
                    parent[p] = grand
                    if grand < 0:
                        roots[t] = p
                    elif left[grand] == j:
                        left[grand] = p
                    else:
                        right[grand] = p
                    parent[j] = p
                    parent[leaf] = p
                    break
                for f in range(n_features):
                    if x[f] < lower[j, f]:
                        lower[j, f] = x[f]
                    elif x[f] > upper[j, f]:
                        upper[j, f] = x[f]
            counts[j, label] += 1
            if feat[j] < 0:
                break
            tau_parent = tau[j]
            if x[feat[j]] <= val[j]:
                j = left[j]
            else:
                j = right[j]


@njit(cache=True)
def mf_posterior(counts, feat, val, left, right, roots, x, base_count, discount, out):
    """Tree-averaged smoothed class posterior, written into ``out``."""
    n_classes = counts.shape[1]
    tmp = np.empty(n_classes)
    for c in range(n_classes):
        out[c] = 0.0
    for t in range(roots.shape[0]):
        j = roots[t]
        n = 0.0
        for c in range(n_classes):
            n += counts[j, c]
        if n + base_count > 0.0:
            for c in range(n_classes):
                tmp[c] = (counts[j, c] + base_count / n_classes) / (n + base_count)
        else:
            for c in range(n_classes):
                tmp[c] = 1.0 / n_classes
        while feat[j] >= 0:
            if x[feat[j]] <= val[j]:
                j = left[j]
            else:
                j = right[j]
            n = 0.0
            for c in range(n_classes):
                n += counts[j, c]
            if n > 0.0:
                for c in range(n_classes):
                    tmp[c] = discount * tmp[c] + (1.0 - discount) * counts[j, c] / n
        for c in range(n_classes):
            out[c] += tmp[c]
    for c in range(n_classes):
        out[c] /= roots.shape[0]


@njit(cache=True)
def mf_predict(counts, feat, val, left, right, roots, x, base_count, discount):
    n_classes = counts.shape[1]
    post = np.empty(n_classes)
    mf_posterior(counts, feat, val, left, right, roots, x, base_count, discount, post)
    best = 0
    for c in range(1, n_classes):
        if post[c] > post[best]:
            best = c
    return best


@njit(cache=True)
def mf_block(lower, upper, counts, feat, val, tau, left, right, parent, roots, meta, state,
             X, y, budget, base_count, discount, out):
    for i in range(X.shape[0]):
        out[i] = mf_predict(counts, feat, val, left, right, roots, X[i], base_count, discount)
        mf_train(lower, upper, counts, feat, val, tau, left, right, parent, roots, meta, state,
                 X[i], y[i], budget)


def node_record_bytes(n_features: int, n_classes: int) -> int:
    """Box (2 reals per feature), split value and split time, class counters, 5 ids."""
    return (2 * n_features + 2) * REAL_BYTES + n_classes * COUNTER_BYTES + 5 * COUNTER_BYTES


class MondrianForest(StreamClassifier):
    name = "mf"

    def __init__(self, n_features, n_classes, params: MondrianParams = MondrianParams()):
        super().__init__(n_features, n_classes)
        self.params = params
        self.record_bytes = node_record_bytes(n_features, n_classes)
        cap = params.memory_bytes // self.record_bytes
        if cap < params.tree_count:
            raise UsageError(
                f"{params.memory_bytes} bytes hold {cap} nodes, fewer than {params.tree_count} trees"
            )
        self.capacity = int(cap)
        t = params.tree_count
        self.lower = np.zeros((cap, n_features))
        self.upper = np.zeros((cap, n_features))
        self.counts = np.zeros((cap, n_classes), dtype=np.int32)
        self.feat = np.full(cap, -1, dtype=np.int32)
        self.val = np.zeros(cap)
        self.tau = np.full(cap, float(params.budget))
        self.left = np.full(cap, -1, dtype=np.int32)
        self.right = np.full(cap, -1, dtype=np.int32)
        self.parent = np.full(cap, -1, dtype=np.int32)
        self.roots = np.arange(t, dtype=np.int32)
        # meta[0]: allocated nodes; meta[1 + t]: tree t has seen data
        self.meta = np.zeros(1 + t, dtype=np.int64)
        self.meta[0] = t
        self.rng_state = new_rng_state(params.seed)

    def _predict(self, x):
        p = self.params
        return mf_predict(self.counts, self.feat, self.val, self.left, self.right, self.roots, x,
                          p.base_count, p.discount_factor)

    def _train(self, x, label):
        mf_train(self.lower, self.upper, self.counts, self.feat, self.val, self.tau, self.left,
                 self.right, self.parent, self.roots, self.meta, self.rng_state, x, label,
                 self.params.budget)

    def _prequential_block(self, X, y, out):
        p = self.params
        mf_block(self.lower, self.upper, self.counts, self.feat, self.val, self.tau, self.left,
                 self.right, self.parent, self.roots, self.meta, self.rng_state, X, y,
                 p.budget, p.base_count, p.discount_factor, out)

    def predict_proba(self, x) -> np.ndarray:
        p = self.params
        out = np.empty(self.n_classes)
        mf_posterior(self.counts, self.feat, self.val, self.left, self.right, self.roots,
                     self._as_features(x), p.base_count, p.discount_factor, out)
        return out

    @property
    def n_nodes(self) -> int:
        return int(self.meta[0])

    @property
    def is_full(self) -> bool:
        return self.n_nodes + 2 > self.capacity

    def tree_nodes(self, t: int):
        """Node ids of tree ``t`` in depth-first order."""
        out, stack = [], [int(self.roots[t])]
        while stack:
            j = stack.pop()
            out.append(j)
            if self.feat[j] >= 0:
                stack.extend((int(self.right[j]), int(self.left[j])))
        return out

    def leaf_of(self, t: int, x) -> int:
        x = self._as_features(x)
        j = int(self.roots[t])
        while self.feat[j] >= 0:
            j = int(self.left[j] if x[self.feat[j]] <= self.val[j] else self.right[j])
        return j

    def memory_bytes(self) -> int:
        # the arena is allocated up front
        return int(self.params.memory_bytes)
