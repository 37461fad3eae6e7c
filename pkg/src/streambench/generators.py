"""Seeded synthetic streams shaped after the MOA Hyperplane, RandomRBF and RandomTree generators.

Each generator draws its model (plane, centroids, tree) and its instances from
independent children of one ``SeedSequence``, so a spec maps to exactly one stream.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import ArrayStream, UsageError

DEFAULT_LENGTH = 200_000


def _rngs(seed: int):
    model_ss, data_ss = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(model_ss), np.random.default_rng(data_ss)


def _flip_labels(y, noise, num_classes, rng):
    if noise <= 0:
        return y
    flip = rng.random(len(y)) < noise
    # a uniformly chosen *different* class
    offset = rng.integers(1, num_classes, size=len(y))
    y = y.copy()
    y[flip] = (y[flip] + offset[flip]) % num_classes
    return y


def gen_hyperplane(length=DEFAULT_LENGTH, dimensionality=3, num_classes=2, seed=0,
                   weights=None, threshold=None, noise=0.05) -> ArrayStream:
    """Uniform points in the unit cube labelled by their side of a hyperplane.

    Defaults draw weights uniformly from [0, 1] and put the threshold at half
    their sum, which balances the two classes. With more than two classes the
    projection is cut at ``k/C`` of the weight sum.
    """
    model_rng, data_rng = _rngs(seed)
    if weights is None:
        weights = model_rng.random(dimensionality)
    weights = np.asarray(weights, dtype=np.float64)
    if weights.shape != (dimensionality,):
        raise UsageError("weights must have one entry per feature")
    X = data_rng.random((length, dimensionality))
    proj = X @ weights
    if threshold is not None:
        if num_classes != 2:
            raise UsageError("an explicit threshold only applies to two classes")
        cuts = np.array([threshold])
    else:
        cuts = weights.sum() * np.arange(1, num_classes) / num_classes
    y = np.searchsorted(cuts, proj, side="right").astype(np.int64)
    y = _flip_labels(y, noise, num_classes, data_rng)
    return ArrayStream(X, y, num_classes, "synth:hyperplane")


def default_class_weights(num_classes):
    # "slight imbalance": class 1 gets 60% for the binary case
    if num_classes == 2:
        return np.array([0.4, 0.6])
    return np.full(num_classes, 1.0 / num_classes)


def gen_randomrbf(length=DEFAULT_LENGTH, dimensionality=3, num_classes=2, seed=0,
                  n_centroids=50, class_weights=None, spread=0.05) -> ArrayStream:
    """Gaussian blobs around seeded centroids in the unit cube.

    Centroid classes are assigned round-robin (then shuffled) so every class owns
    at least one centroid. Each instance first draws its class from
    ``class_weights``, then a centroid of that class by centroid weight, then adds
    an isotropic Gaussian offset with the centroid's own standard deviation, drawn
    uniformly from [0, spread].
    """
    if n_centroids < num_classes:
        raise UsageError("need at least one centroid per class")
    model_rng, data_rng = _rngs(seed)
    centers = model_rng.random((n_centroids, dimensionality))
    classes = model_rng.permutation(np.arange(n_centroids) % num_classes)
    stds = model_rng.random(n_centroids) * spread
    cweights = model_rng.random(n_centroids)
    if class_weights is None:
        class_weights = default_class_weights(num_classes)
    class_weights = np.asarray(class_weights, dtype=np.float64)
    class_weights = class_weights / class_weights.sum()

    y = data_rng.choice(num_classes, size=length, p=class_weights).astype(np.int64)
    which = np.empty(length, dtype=np.int64)
    u = data_rng.random(length)
    for c in range(num_classes):
        members = np.flatnonzero(classes == c)
        cdf = np.cumsum(cweights[members])
        cdf /= cdf[-1]
        mask = y == c
        which[mask] = members[np.minimum(np.searchsorted(cdf, u[mask], side="right"),
                                         len(members) - 1)]
    offsets = data_rng.standard_normal((length, dimensionality))
    X = centers[which] + offsets * stds[which, None]
    stream = ArrayStream(X, y, num_classes, "synth:randomrbf")
    stream.centroids = centers
    return stream


@dataclass
class RandomTree:
    """A complete binary decision tree over the unit cube.

    Node arrays are indexed heap-style: children of ``i`` are ``2i+1`` and ``2i+2``;
    nodes ``>= 2**depth - 1`` are leaves carrying ``leaf_class``.
    """

    depth: int
    feature: np.ndarray
    threshold: np.ndarray
    leaf_class: np.ndarray

    @classmethod
    def random(cls, depth, dimensionality, num_classes, rng):
        n_internal = 2 ** depth - 1
        feature = np.zeros(n_internal, dtype=np.int64)
        threshold = np.zeros(n_internal)
        lo = np.zeros((n_internal, dimensionality))
        hi = np.ones((n_internal, dimensionality))
        for i in range(n_internal):
            f = int(rng.integers(dimensionality))
            t = rng.uniform(lo[i, f], hi[i, f])
            feature[i], threshold[i] = f, t
            for child, side in ((2 * i + 1, "left"), (2 * i + 2, "right")):
                if child < n_internal:
                    lo[child], hi[child] = lo[i], hi[i]
                    if side == "left":
                        hi[child, f] = t
                    else:
                        lo[child, f] = t
        n_leaves = 2 ** depth
        leaf_class = rng.permutation(np.arange(n_leaves) % num_classes)
        return cls(depth, feature, threshold, leaf_class)

    def label(self, X) -> np.ndarray:
        X = np.atleast_2d(X)
        node = np.zeros(len(X), dtype=np.int64)
        rows = np.arange(len(X))
        for _ in range(self.depth):
            go_right = X[rows, self.feature[node]] > self.threshold[node]
            node = 2 * node + 1 + go_right
        return self.leaf_class[node - (2 ** self.depth - 1)]


def gen_randomtree(length=DEFAULT_LENGTH, dimensionality=6, num_classes=10, seed=0, depth=5,
                   tree: Optional[RandomTree] = None) -> ArrayStream:
    """Uniform points in the unit cube labelled by a seeded random decision tree.

    Split thresholds are drawn inside each node's current region, so no leaf is
    empty; leaf classes cycle through all classes before being shuffled.
    """
    model_rng, data_rng = _rngs(seed)
    if tree is None:
        tree = RandomTree.random(depth, dimensionality, num_classes, model_rng)
    X = data_rng.random((length, dimensionality))
    stream = ArrayStream(X, tree.label(X), num_classes, "synth:randomtree")
    stream.tree = tree
    return stream


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str
    seed: int = 0
    length: int = DEFAULT_LENGTH
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in GENERATORS:
            raise UsageError(f"unknown generator {self.kind!r}")
        if self.length <= 0:
            raise UsageError("length must be > 0")


GENERATORS = {
    "hyperplane": gen_hyperplane,
    "randomrbf": gen_randomrbf,
    "randomtree": gen_randomtree,
}


def generate(spec: GeneratorSpec) -> ArrayStream:
    stream = GENERATORS[spec.kind](length=spec.length, seed=spec.seed, **spec.params)
    return stream
