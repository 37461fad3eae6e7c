"""Fully connected sigmoid network trained online with squared-error backpropagation."""

from __future__ import annotations

from typing import List, Sequence, Tuple

import numpy as np

from .core import COUNTER_BYTES, REAL_BYTES, FnnParams, StreamClassifier, UsageError

Layer = Tuple[np.ndarray, np.ndarray]  # (weights out x in, bias out)


def sigmoid(z):
    return 1.0 / (1.0 + np.exp(-z))


def init_weights(sizes: Sequence[int], seed: int = 0) -> List[Layer]:
    """Uniform in +-1/sqrt(fan_in) for weights and biases."""
    rng = np.random.default_rng(seed)
    layers = []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        bound = 1.0 / np.sqrt(fan_in)
        layers.append((rng.uniform(-bound, bound, (fan_out, fan_in)),
                       rng.uniform(-bound, bound, fan_out)))
    return layers


def fnn_activations(weights: List[Layer], x) -> List[np.ndarray]:
    acts = [np.asarray(x, dtype=np.float64)]
    if acts[0].shape[0] != weights[0][0].shape[1]:
        raise UsageError(f"expected {weights[0][0].shape[1]} inputs, got {acts[0].shape[0]}")
    for W, b in weights:
        acts.append(sigmoid(W @ acts[-1] + b))
    return acts


def fnn_forward(weights: List[Layer], x) -> np.ndarray:
    return fnn_activations(weights, x)[-1]


def one_hot(label: int, n: int) -> np.ndarray:
    t = np.zeros(n)
    t[label] = 1.0
    return t


def fnn_loss(weights: List[Layer], x, label: int) -> float:
    out = fnn_forward(weights, x)
    return 0.5 * float(np.sum((out - one_hot(label, out.shape[0])) ** 2))


def fnn_gradients(weights: List[Layer], x, label: int) -> List[Layer]:
    """Gradient of 0.5 * ||output - onehot(label)||^2 w.r.t. every weight and bias."""
    acts = fnn_activations(weights, x)
    out = acts[-1]
    delta = (out - one_hot(label, out.shape[0])) * out * (1.0 - out)
    grads = []
    for i in range(len(weights) - 1, -1, -1):
        grads.append((np.outer(delta, acts[i]), delta))
        if i:
            a = acts[i]
            delta = (weights[i][0].T @ delta) * a * (1.0 - a)
    return grads[::-1]


def fnn_backprop(weights: List[Layer], x, label: int, learning_rate: float) -> List[Layer]:
    """One in-place SGD step; returns ``weights`` for chaining."""
    for (W, b), (gW, gb) in zip(weights, fnn_gradients(weights, x, label)):
        W -= learning_rate * gW
        b -= learning_rate * gb
    return weights


def fnn_pretrain(weights: List[Layer], X, y, epochs: int, learning_rate: float, seed: int = 0
                 ) -> List[Layer]:
    """``epochs`` passes of per-example SGD, each over a fresh seeded shuffle."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if len(y) == 0:
        raise UsageError("pretraining sample is empty")
    rng = np.random.default_rng(seed)
    for _ in range(epochs):
        for i in rng.permutation(len(y)):
            fnn_backprop(weights, X[i], int(y[i]), learning_rate)
    return weights


class FeedForwardNetwork(StreamClassifier):
    """Sigmoid MLP; predicts class 0 until it has been trained or pretrained."""

    name = "fnn"

    def __init__(self, n_features, n_classes, params: FnnParams = FnnParams()):
        super().__init__(n_features, n_classes)
        self.params = params
        self.sizes = [n_features, *params.hidden, n_classes]
        self.weights = init_weights(self.sizes, params.seed)
        self.trained = False

    def scores(self, x) -> np.ndarray:
        return fnn_forward(self.weights, self._as_features(x))

    def _predict(self, x):
        if not self.trained:
            return 0
        return int(np.argmax(fnn_forward(self.weights, x)))

    def _train(self, x, label):
        fnn_backprop(self.weights, x, label, self.params.learning_rate)
        self.trained = True

    def pretrain(self, X, y, epochs: int, seed: int = 0) -> None:
        fnn_pretrain(self.weights, X, y, epochs, self.params.learning_rate, seed)
        if epochs > 0:
            self.trained = True

    def memory_bytes(self) -> int:
        n_params = sum(W.size + b.size for W, b in self.weights)
        n_acts = sum(self.sizes)
        return n_params * REAL_BYTES + n_acts * REAL_BYTES + len(self.sizes) * COUNTER_BYTES
