"""Data model and the online-classifier contract shared by every learner."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, NamedTuple, Optional, Sequence, Tuple

import numpy as np

# Self-accounting widths used by every memory_bytes() implementation.
REAL_BYTES = 8
COUNTER_BYTES = 4


class StreamBenchError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(StreamBenchError):
    """Classifier or dataset configured inconsistently (e.g. wrong dimensionality)."""


class UsageError(StreamBenchError):
    """An operation was called with arguments outside its contract."""


class DataError(StreamBenchError):
    """Malformed input data."""


class Instance(NamedTuple):
    features: np.ndarray
    label: Optional[int] = None


@dataclass(frozen=True)
class StreamSpec:
    dimensionality: int
    num_classes: int
    length: int

    def __post_init__(self):
        if self.dimensionality < 1:
            raise UsageError("dimensionality must be >= 1")
        if self.num_classes < 2:
            raise UsageError("num_classes must be >= 2")
        if self.length < 0:
            raise UsageError("length must be >= 0")


class ArrayStream:
    """An in-memory labelled stream backed by a feature matrix and a label vector."""

    def __init__(self, X, y, num_classes: Optional[int] = None, name: str = "array"):
        X = np.ascontiguousarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
            raise DataError(f"feature matrix {X.shape} and labels {y.shape} do not align")
        if y.size and y.min() < 0:
            raise DataError("labels must be non-negative integers")
        if num_classes is None:
            num_classes = max(int(y.max()) + 1 if y.size else 2, 2)
        if y.size and y.max() >= num_classes:
            raise DataError(f"label {int(y.max())} outside [0, {num_classes})")
        self.X = X
        self.y = y
        self.name = name
        self.spec = StreamSpec(X.shape[1], num_classes, X.shape[0])

    def __len__(self) -> int:
        return self.X.shape[0]

    def __iter__(self) -> Iterator[Instance]:
        for x, label in zip(self.X, self.y.tolist()):
            yield Instance(x, label)

    def iter_blocks(self, size: int) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
        """Consecutive ``(X, y)`` slices of at most ``size`` rows."""
        for lo in range(0, len(self.y), size):
            yield self.X[lo:lo + size], self.y[lo:lo + size]

    def take(self, n: int) -> "ArrayStream":
        return ArrayStream(self.X[:n], self.y[:n], self.spec.num_classes, self.name)

    def with_labels(self, y) -> "ArrayStream":
        return ArrayStream(self.X, y, self.spec.num_classes, self.name)


# --- hyperparameters -------------------------------------------------------


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise UsageError(message)


@dataclass(frozen=True)
class NaiveBayesParams:
    var_floor: float = 1e-6


@dataclass(frozen=True)
class HoeffdingParams:
    delta: float = 0.01
    grace_period: int = 10
    tie_epsilon: float = 0.05
    n_thresholds: int = 10
    leaf_learner: str = "nb"

    def __post_init__(self):
        _require(0.0 < self.delta < 1.0, "delta must lie in (0, 1)")
        _require(self.grace_period >= 1, "grace_period must be >= 1")
        _require(self.tie_epsilon >= 0.0, "tie_epsilon must be >= 0")
        _require(self.n_thresholds >= 1, "n_thresholds must be >= 1")
        _require(self.leaf_learner == "nb", "only the naive Bayes leaf learner is supported")


@dataclass(frozen=True)
class MondrianParams:
    tree_count: int = 10
    base_count: float = 0.0
    discount_factor: float = 0.6
    budget: float = 0.4
    memory_bytes: int = 600 * 1024
    seed: int = 0

    def __post_init__(self):
        _require(self.tree_count >= 1, "tree_count must be >= 1")
        _require(self.base_count >= 0.0, "base_count must be >= 0")
        _require(0.0 <= self.discount_factor < 1.0, "discount_factor must lie in [0, 1)")
        _require(self.budget > 0.0, "budget must be > 0")
        _require(self.memory_bytes > 0, "memory_bytes must be > 0")


@dataclass(frozen=True)
class McnnParams:
    variant: str = "orpaillecc"
    error_threshold: int = 2
    participation_threshold: int = 50
    max_clusters: int = 40

    def __post_init__(self):
        _require(self.variant in ("origin", "orpaillecc"), f"unknown MCNN variant {self.variant!r}")
        _require(self.error_threshold >= 1, "error_threshold must be >= 1")
        _require(self.max_clusters >= 1, "max_clusters must be >= 1")


@dataclass(frozen=True)
class FnnParams:
    hidden: Sequence[int] = (30,)
    learning_rate: float = 0.01
    seed: int = 0

    def __post_init__(self):
        _require(self.learning_rate > 0.0, "learning_rate must be > 0")
        _require(all(h >= 1 for h in self.hidden), "hidden layer sizes must be >= 1")


@dataclass(frozen=True)
class KnnParams:
    k_range: tuple = (2, 20)
    train_fraction: float = 0.1
    validation_fraction: float = 0.2
    seed: int = 0

    def __post_init__(self):
        lo, hi = self.k_range
        _require(1 <= lo <= hi, "k_range must satisfy 1 <= lo <= hi")
        _require(0.0 < self.train_fraction < 1.0, "train_fraction must lie in (0, 1)")
        _require(0.0 < self.validation_fraction < 1.0, "validation_fraction must lie in (0, 1)")


# --- classifier contract ---------------------------------------------------


class StreamClassifier:
    """Base class for online classifiers.

    Subclasses implement ``_predict``, ``_train`` and ``memory_bytes``. The public
    ``predict``/``train`` wrappers enforce the dimensionality and label contract.
    """

    name = "base"

    def __init__(self, n_features: int, n_classes: int):
        if n_features < 1:
            raise ConfigurationError("n_features must be >= 1")
        if n_classes < 2:
            raise ConfigurationError("n_classes must be >= 2")
        self.n_features = int(n_features)
        self.n_classes = int(n_classes)

    def _as_features(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 1 or x.shape[0] != self.n_features:
            raise ConfigurationError(
                f"{self.name}: expected {self.n_features} features, got shape {x.shape}"
            )
        return x

    def predict(self, x) -> int:
        return self._predict(self._as_features(x))

    def train(self, x, label) -> None:
        if label is None:
            raise UsageError(f"{self.name}: train() needs a labelled instance")
        label = int(label)
        if not 0 <= label < self.n_classes:
            raise ConfigurationError(f"{self.name}: label {label} outside [0, {self.n_classes})")
        self._train(self._as_features(x), label)

    @property
    def supports_blocks(self) -> bool:
        return type(self)._prequential_block is not StreamClassifier._prequential_block

    def prequential_block(self, X, y) -> np.ndarray:
        """Predict-then-train each row of ``X`` in order; returns the predictions.

        Equivalent to alternating ``predict`` and ``train`` per row, but subclasses
        with a compiled kernel run the whole block in one call.
        """
        X = np.ascontiguousarray(X, dtype=np.float64)
        y = np.ascontiguousarray(y, dtype=np.int64)
        if X.ndim != 2 or X.shape[1] != self.n_features or y.shape != (X.shape[0],):
            raise ConfigurationError(
                f"{self.name}: expected ({len(y)}, {self.n_features}) block, got {X.shape}"
            )
        if y.size and (y.min() < 0 or y.max() >= self.n_classes):
            raise ConfigurationError(f"{self.name}: labels outside [0, {self.n_classes})")
        out = np.empty(X.shape[0], dtype=np.int64)
        if self.supports_blocks:
            self._prequential_block(X, y, out)
        else:
            for i in range(X.shape[0]):
                out[i] = self._predict(X[i])
                self._train(X[i], int(y[i]))
        return out

    def memory_bytes(self) -> int:
        raise NotImplementedError

    def _prequential_block(self, X: np.ndarray, y: np.ndarray, out: np.ndarray) -> None:
        raise NotImplementedError

    def _predict(self, x: np.ndarray) -> int:
        raise NotImplementedError

    def _train(self, x: np.ndarray, label: int) -> None:
        raise NotImplementedError


# --- seeding ---------------------------------------------------------------

SEED_GENERATOR, SEED_SHUFFLE, SEED_CLASSIFIER = 0, 1, 2


def derive_seed(rep_seed: int, purpose: int) -> int:
    """Independent 32-bit seed for one purpose of one repetition.

    Depends only on ``(rep_seed, purpose)``, so reordering or parallelising
    repetitions never changes any single repetition.
    """
    return int(np.random.SeedSequence([rep_seed, purpose]).generate_state(1)[0])
