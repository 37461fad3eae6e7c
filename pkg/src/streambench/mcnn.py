"""Micro-Cluster Nearest Neighbour (MC-NN) with its two eviction policies.

``origin`` drops every cluster whose participation falls below a threshold after
each training step; ``orpaillecc`` keeps clusters until a slot is needed and
then evicts the least participating one.

Each cluster stores its centroid and per-feature sum of squares (the linear sum
is centroid * count) plus an integer record: count, label, error counter,
participation and creation order. A slot is free when its count is zero.
Participation starts at ``INITIAL_PARTICIPATION``, gains one per absorbed
instance (capped at the initial value) and loses one on every training step
where the cluster absorbs nothing.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from .core import COUNTER_BYTES, REAL_BYTES, ConfigurationError, McnnParams, StreamClassifier

INITIAL_PARTICIPATION = 100

ORIGIN = 0
ORPAILLECC = 1

# columns of the integer record
CNT, LAB, ERR, PART, SEQ = range(5)
# meta: active clusters, next creation id
_ACTIVE, _NEXT_SEQ = 0, 1
# cfg: error threshold, participation threshold, variant
_ERR_T, _PART_T, _VARIANT = 0, 1, 2


@njit(cache=True)
def _dist2(cen, k, x):
    d = 0.0
    for f in range(x.shape[0]):
        diff = cen[k, f] - x[f]
        d += diff * diff
    return d


@njit(cache=True)
def mcnn_predict(cen, rec, x):
    """Label of the nearest centroid (earliest created on ties); 0 with no clusters."""
    best = -1
    best_d = np.inf
    for k in range(rec.shape[0]):
        if rec[k, CNT] == 0:
            continue
        d = _dist2(cen, k, x)
        if d < best_d or (d == best_d and rec[k, SEQ] < rec[best, SEQ]):
            best_d = d
            best = k
    if best < 0:
        return 0
    return rec[best, LAB]


@njit(cache=True)
def _free_slot(rec):
    for k in range(rec.shape[0]):
        if rec[k, CNT] == 0:
            return k
    return -1


@njit(cache=True)
def mcnn_evict(rec, meta, protect_a, protect_b):
    """Remove the least participating cluster (oldest on ties); returns its slot."""
    victim = -1
    for k in range(rec.shape[0]):
        if rec[k, CNT] == 0 or k == protect_a or k == protect_b:
            continue
        if (victim < 0 or rec[k, PART] < rec[victim, PART]
                or (rec[k, PART] == rec[victim, PART] and rec[k, SEQ] < rec[victim, SEQ])):
            victim = k
    if victim >= 0:
        rec[victim, CNT] = 0
        meta[_ACTIVE] -= 1
    return victim


@njit(cache=True)
def _create(cen, sq, rec, meta, slot, x, label):
    for f in range(x.shape[0]):
        cen[slot, f] = x[f]
        sq[slot, f] = x[f] * x[f]
    rec[slot, CNT] = 1
    rec[slot, LAB] = label
    rec[slot, ERR] = 0
    rec[slot, PART] = INITIAL_PARTICIPATION
    rec[slot, SEQ] = meta[_NEXT_SEQ]
    meta[_NEXT_SEQ] += 1
    meta[_ACTIVE] += 1


@njit(cache=True)
def _absorb(cen, sq, rec, k, x):
    n = rec[k, CNT] + 1
    rec[k, CNT] = n
    for f in range(x.shape[0]):
        cen[k, f] += (x[f] - cen[k, f]) / n
        sq[k, f] += x[f] * x[f]
    if rec[k, PART] < INITIAL_PARTICIPATION:
        rec[k, PART] += 1


@njit(cache=True)
def mcnn_split(cen, sq, rec, meta, k, variant):
    """Split cluster ``k`` along its highest-variance feature.

    The children sit one standard deviation either side of the parent centroid,
    keep the parent's per-feature variance and label, and take ceil(n/2) and
    floor(n/2) of its count. Returns the slot of the second child, or -1 when the
    split was skipped (count < 2, or no slot available under ``origin``).
    """
    n = rec[k, CNT]
    rec[k, ERR] = 0
    if n < 2:
        return -1
    slot = _free_slot(rec)
    if slot < 0:
        if variant != ORPAILLECC:
            return -1
        slot = mcnn_evict(rec, meta, k, -1)
        if slot < 0:
            return -1
    axis = 0
    best_var = -1.0
    for f in range(cen.shape[1]):
        m = cen[k, f]
        v = sq[k, f] / n - m * m
        if v > best_var:
            best_var = v
            axis = f
    std = math.sqrt(max(best_var, 0.0))
    n_a = (n + 1) // 2
    n_b = n // 2
    for f in range(cen.shape[1]):
        m = cen[k, f]
        v = max(sq[k, f] / n - m * m, 0.0)
        ca = m
        cb = m
        if f == axis:
            ca = m + std
            cb = m - std
        cen[k, f] = ca
        sq[k, f] = n_a * (v + ca * ca)
        cen[slot, f] = cb
        sq[slot, f] = n_b * (v + cb * cb)
    rec[k, CNT] = n_a
    rec[slot, CNT] = n_b
    rec[slot, LAB] = rec[k, LAB]
    rec[slot, ERR] = 0
    rec[k, PART] = INITIAL_PARTICIPATION
    rec[slot, PART] = INITIAL_PARTICIPATION
    rec[k, SEQ] = meta[_NEXT_SEQ]
    rec[slot, SEQ] = meta[_NEXT_SEQ] + 1
    meta[_NEXT_SEQ] += 2
    meta[_ACTIVE] += 1
    return slot


@njit(cache=True)
def _scan(cen, rec, x, label):
    """Nearest cluster overall and nearest cluster of ``label`` (-1 when absent)."""
    nearest = -1
    nearest_d = np.inf
    same = -1
    same_d = np.inf
    for k in range(rec.shape[0]):
        if rec[k, CNT] == 0:
            continue
        d = _dist2(cen, k, x)
        if d < nearest_d or (d == nearest_d and rec[k, SEQ] < rec[nearest, SEQ]):
            nearest_d = d
            nearest = k
        if rec[k, LAB] == label and (d < same_d or (d == same_d and rec[k, SEQ] < rec[same, SEQ])):
            same_d = d
            same = k
    return nearest, same


@njit(cache=True)
def _learn(cen, sq, rec, meta, cfg, x, label, nearest, same):
    variant = cfg[_VARIANT]
    absorbed = -1
    if nearest >= 0 and rec[nearest, LAB] == label:
        _absorb(cen, sq, rec, nearest, x)
        absorbed = nearest
    else:
        if nearest >= 0:
            rec[nearest, ERR] += 1
        if same >= 0:
            rec[same, ERR] += 1
            _absorb(cen, sq, rec, same, x)
            absorbed = same
        else:
            slot = _free_slot(rec)
            if slot < 0 and variant == ORPAILLECC:
                slot = mcnn_evict(rec, meta, nearest, -1)
            if slot >= 0:
                _create(cen, sq, rec, meta, slot, x, label)
                absorbed = slot

    for k in range(rec.shape[0]):
        if rec[k, CNT] > 0 and k != absorbed:
            rec[k, PART] -= 1

    threshold = cfg[_ERR_T]
    if nearest >= 0 and rec[nearest, CNT] > 0 and rec[nearest, ERR] > threshold:
        mcnn_split(cen, sq, rec, meta, nearest, variant)
    if same >= 0 and same != nearest and rec[same, CNT] > 0 and rec[same, ERR] > threshold:
        mcnn_split(cen, sq, rec, meta, same, variant)

    if variant == ORIGIN:
        floor = cfg[_PART_T]
        for k in range(rec.shape[0]):
            if rec[k, CNT] > 0 and rec[k, PART] < floor:
                rec[k, CNT] = 0
                meta[_ACTIVE] -= 1


@njit(cache=True)
def mcnn_train(cen, sq, rec, meta, cfg, x, label):
    nearest, same = _scan(cen, rec, x, label)
    _learn(cen, sq, rec, meta, cfg, x, label, nearest, same)


@njit(cache=True)
def mcnn_block(cen, sq, rec, meta, cfg, X, y, out):
    # prediction and training see the same state, so one scan serves both
    for i in range(X.shape[0]):
        nearest, same = _scan(cen, rec, X[i], y[i])
        out[i] = rec[nearest, LAB] if nearest >= 0 else 0
        _learn(cen, sq, rec, meta, cfg, X[i], y[i], nearest, same)


def cluster_record_bytes(n_features: int) -> int:
    """Linear and squared sums per feature plus count, label, error, participation, creation id."""
    return 2 * n_features * REAL_BYTES + 5 * COUNTER_BYTES


class MicroClusterNN(StreamClassifier):
    name = "mcnn"

    def __init__(self, n_features, n_classes, params: McnnParams = McnnParams()):
        super().__init__(n_features, n_classes)
        if params.max_clusters < n_classes:
            raise ConfigurationError(
                f"max_clusters={params.max_clusters} is below the class count {n_classes}")
        self.params = params
        self.name = f"mcnn-{params.variant}"
        self.variant = ORIGIN if params.variant == "origin" else ORPAILLECC
        k = params.max_clusters
        self.cen = np.zeros((k, n_features))
        self.sq = np.zeros((k, n_features))
        self.rec = np.zeros((k, 5), dtype=np.int64)
        self.meta = np.zeros(2, dtype=np.int64)
        self.cfg = np.array([params.error_threshold, params.participation_threshold, self.variant],
                            dtype=np.int64)

    def _predict(self, x):
        return mcnn_predict(self.cen, self.rec, x)

    def _train(self, x, label):
        mcnn_train(self.cen, self.sq, self.rec, self.meta, self.cfg, x, label)

    def _prequential_block(self, X, y, out):
        mcnn_block(self.cen, self.sq, self.rec, self.meta, self.cfg, X, y, out)

    @property
    def n_clusters(self) -> int:
        return int(self.meta[_ACTIVE])

    def active_slots(self) -> np.ndarray:
        return np.flatnonzero(self.rec[:, CNT] > 0)

    def clusters(self):
        """Snapshot dicts of the active clusters, oldest first."""
        out = []
        for k in self.active_slots():
            out.append({
                "slot": int(k),
                "centroid": self.cen[k].copy(),
                "count": int(self.rec[k, CNT]),
                "label": int(self.rec[k, LAB]),
                "error": int(self.rec[k, ERR]),
                "participation": int(self.rec[k, PART]),
                "created": int(self.rec[k, SEQ]),
                "variance": self.sq[k] / self.rec[k, CNT] - self.cen[k] ** 2,
            })
        return sorted(out, key=lambda c: c["created"])

    def split(self, slot: int) -> int:
        return int(mcnn_split(self.cen, self.sq, self.rec, self.meta, slot, self.variant))

    def evict(self) -> int:
        return int(mcnn_evict(self.rec, self.meta, -1, -1))

    def memory_bytes(self) -> int:
        return self.n_clusters * cluster_record_bytes(self.n_features)
