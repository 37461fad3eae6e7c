"""Windowing of raw sensor samples into feature instances, plus label-shift drift."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, List, Sequence, Tuple

import numpy as np

from .core import ArrayStream, Instance, UsageError

DEFAULT_WINDOW = 50
DEFAULT_BINS = 20


@dataclass
class SampleWindow:
    samples: np.ndarray  # window_size x axes
    labels: np.ndarray  # window_size


def iter_windows(rows: Iterable[Tuple[Sequence[float], int]], window_size: int = DEFAULT_WINDOW
                 ) -> Iterator[SampleWindow]:
    """Group ``(sample, label)`` rows into consecutive non-overlapping windows.

    Only one window is buffered at a time; a trailing partial window is dropped.
    """
    if window_size < 1:
        raise UsageError("window_size must be >= 1")
    buf, labels = [], []
    for sample, label in rows:
        buf.append(sample)
        labels.append(label)
        if len(buf) == window_size:
            yield SampleWindow(np.asarray(buf, dtype=np.float64), np.asarray(labels, dtype=np.int64))
            buf, labels = [], []


def window_stream(samples, labels, window_size: int = DEFAULT_WINDOW) -> List[SampleWindow]:
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim == 1:
        samples = samples[:, None]
    labels = np.asarray(labels, dtype=np.int64)
    if window_size < 1:
        raise UsageError("window_size must be >= 1")
    n = (len(samples) // window_size) * window_size
    return [
        SampleWindow(samples[i:i + window_size], labels[i:i + window_size])
        for i in range(0, n, window_size)
    ]


def majority_label(window: SampleWindow) -> int:
    if len(window.labels) == 0:
        raise UsageError("empty window")
    return int(np.bincount(window.labels).argmax())


def meanstd_features(window: SampleWindow) -> Instance:
    """Per-axis mean and population std, interleaved as [mean0, std0, mean1, std1, ...]."""
    s = window.samples
    if s.shape[0] == 0:
        raise UsageError("empty window")
    feats = np.empty(2 * s.shape[1])
    feats[0::2] = s.mean(axis=0)
    feats[1::2] = s.std(axis=0)
    return Instance(feats, majority_label(window))


def histogram_features(window: SampleWindow, bins: int, ranges) -> Instance:
    """Per-axis normalised equal-width histograms over ``ranges`` (axes x [lo, hi]).

    Out-of-range samples clamp into the first or last bin.
    """
    if bins < 1:
        raise UsageError("bins must be >= 1")
    ranges = np.asarray(ranges, dtype=np.float64)
    lo, hi = ranges[:, 0], ranges[:, 1]
    if np.any(lo >= hi):
        raise UsageError("each histogram range needs lo < hi")
    s = window.samples
    n, axes = s.shape
    idx = np.floor((s - lo) / (hi - lo) * bins).astype(np.int64)
    np.clip(idx, 0, bins - 1, out=idx)
    feats = np.zeros(axes * bins)
    flat = idx + np.arange(axes) * bins
    np.add.at(feats, flat.ravel(), 1.0)
    return Instance(feats / n, majority_label(window))


def histogram_ranges(samples, fraction: float = 0.1) -> np.ndarray:
    """Per-axis [min, max] over the leading ``fraction`` of the samples.

    Degenerate axes are widened by one unit so that lo < hi always holds.
    """
    samples = np.asarray(samples, dtype=np.float64)
    head = samples[:max(1, int(len(samples) * fraction))]
    lo, hi = head.min(axis=0), head.max(axis=0)
    flat = lo >= hi
    lo = np.where(flat, lo - 0.5, lo)
    hi = np.where(flat, hi + 0.5, hi)
    return np.stack([lo, hi], axis=1)


def windows_to_stream(windows: Sequence[SampleWindow], extractor="meanstd", bins=DEFAULT_BINS,
                      ranges=None, num_classes=None, name="windows") -> ArrayStream:
    if extractor == "meanstd":
        insts = [meanstd_features(w) for w in windows]
    elif extractor == "histogram":
        if ranges is None:
            raise UsageError("histogram features need per-axis ranges")
        insts = [histogram_features(w, bins, ranges) for w in windows]
    else:
        raise UsageError(f"unknown feature extractor {extractor!r}")
    if not insts:
        raise UsageError("no complete window in the input")
    X = np.stack([i.features for i in insts])
    y = np.array([i.label for i in insts])
    return ArrayStream(X, y, num_classes, name)


@dataclass(frozen=True)
class DriftConfig:
    position: int
    shift: int = 1

    def __post_init__(self):
        if self.shift < 1:
            raise UsageError("drift shift must be a positive integer")
        if self.position < 1:
            raise UsageError("drift position must be >= 1")


def midpoint_drift(length: int, shift: int = 1) -> DriftConfig:
    return DriftConfig(length // 2, shift)


def inject_drift(stream, cfg: DriftConfig, num_classes: int):
    """Shift labels of elements at index >= ``cfg.position`` by ``cfg.shift`` (mod classes)."""
    n = len(stream)
    if not 0 < cfg.position < n:
        raise UsageError(f"drift position {cfg.position} outside (0, {n})")
    if cfg.shift % num_classes == 0:
        raise UsageError("drift shift is a multiple of the class count (no-op drift)")
    if isinstance(stream, ArrayStream):
        y = stream.y.copy()
        y[cfg.position:] = (y[cfg.position:] + cfg.shift) % num_classes
        return ArrayStream(stream.X, y, num_classes, stream.name)
    out = list(stream)
    for i in range(cfg.position, n):
        x, label = out[i]
        out[i] = Instance(x, (label + cfg.shift) % num_classes)
    return out


def shuffle_stream(stream, seed: int):
    """Uniform seeded permutation of the stream."""
    rng = np.random.default_rng(seed)
    perm = rng.permutation(len(stream))
    if isinstance(stream, ArrayStream):
        return ArrayStream(stream.X[perm], stream.y[perm], stream.spec.num_classes, stream.name)
    items = list(stream)
    return [items[i] for i in perm]
