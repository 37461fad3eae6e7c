"""Dataset identifiers, streaming CSV sources and CSV export.

A dataset id is either ``synth:<generator>[,key=value...]`` or a path to a CSV
file. Sample CSVs (header ``a0,...,label``) are windowed and turned into
features on the fly; feature CSVs (header ``f0,...,label``) are streamed as is.
Either way only one window and one block of instances are buffered.
"""

from __future__ import annotations

import csv
import inspect
import os
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from .core import (COUNTER_BYTES, REAL_BYTES, ArrayStream, DataError, Instance, StreamSpec,
                   UsageError)
from .features import (DEFAULT_BINS, DEFAULT_WINDOW, DriftConfig, SampleWindow,
                       histogram_features, meanstd_features)
from .generators import GENERATORS, GeneratorSpec, generate

SYNTH_PREFIX = "synth:"
FEATURE_PIPELINES = ("meanstd", "histogram", "none")
HISTOGRAM_RANGE_FRACTION = 0.1

_ALIASES = {
    "n": "length",
    "d": "dimensionality",
    "classes": "num_classes",
    "centroids": "n_centroids",
}


def _number(text: str):
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        raise UsageError(f"expected a number, got {text!r}") from None


@dataclass(frozen=True)
class DatasetRef:
    text: str
    kind: str
    name: str
    params: Dict[str, object] = field(default_factory=dict)
    seed: Optional[int] = None
    length: Optional[int] = None


def parse_dataset_id(text: str) -> DatasetRef:
    """Parse ``synth:kind,seed=1,n=1000,...`` or a CSV path."""
    if not text.startswith(SYNTH_PREFIX):
        if not os.path.isfile(text):
            raise UsageError(f"dataset {text!r} is neither a synth: id nor an existing file")
        return DatasetRef(text, "csv", text)
    body = text[len(SYNTH_PREFIX):]
    kind, *pairs = [part.strip() for part in body.split(",")]
    if kind not in GENERATORS:
        raise UsageError(f"unknown generator {kind!r}; choose from {sorted(GENERATORS)}")
    accepted = set(inspect.signature(GENERATORS[kind]).parameters)
    params: Dict[str, object] = {}
    seed = length = None
    for pair in pairs:
        if not pair:
            continue
        key, sep, value = pair.partition("=")
        if not sep:
            raise UsageError(f"expected key=value in dataset id, got {pair!r}")
        key = _ALIASES.get(key.strip(), key.strip())
        if key == "seed":
            seed = int(_number(value))
        elif key == "length":
            length = int(_number(value))
        elif key in accepted and key not in ("weights", "class_weights", "tree"):
            params[key] = _number(value)
        else:
            raise UsageError(f"generator {kind!r} has no parameter {key!r}")
    return DatasetRef(text, "synth", kind, params, seed, length)


def open_dataset(ref: DatasetRef, seed: int = 0, features: str = "meanstd",
                 window: int = DEFAULT_WINDOW, bins: int = DEFAULT_BINS):
    """Materialise a synthetic stream or open a streaming CSV source.

    ``seed`` is used for synthetic streams whose id does not pin one.
    """
    if ref.kind == "synth":
        spec = GeneratorSpec(ref.name, ref.seed if ref.seed is not None else seed,
                             ref.length if ref.length is not None else 200_000, dict(ref.params))
        stream = generate(spec)
        stream.name = ref.text
        return stream
    return CsvStream(ref.name, features=features, window=window, bins=bins)


def _parse_row(row: List[str], width: int, path: str, line: int) -> Tuple[np.ndarray, int]:
    if len(row) != width:
        raise DataError(f"{path}:{line}: expected {width} columns, got {len(row)}")
    try:
        values = np.array([float(v) for v in row[:-1]])
        label = int(row[-1])
    except ValueError:
        raise DataError(f"{path}:{line}: malformed value in {row!r}") from None
    if not np.all(np.isfinite(values)):
        raise DataError(f"{path}:{line}: non-finite value")
    return values, label


def _read_header(path: str, header: List[str]) -> str:
    if not header or header[-1].strip() != "label" or len(header) < 2:
        raise DataError(f"{path}:1: header must end with a 'label' column")
    cols = [h.strip() for h in header[:-1]]
    for prefix, kind in (("a", "samples"), ("f", "features")):
        if cols == [f"{prefix}{i}" for i in range(len(cols))]:
            return kind
    raise DataError(f"{path}:1: expected columns a0..aN or f0..fN before 'label'")


class CsvStream:
    """Labelled stream read lazily from a sample or feature CSV.

    Construction makes one validating pass that collects the label set, row
    count and, for histogram features, the per-axis ranges of the first 10% of
    samples. Iteration re-reads the file. ``peak_buffer_bytes`` self-accounts
    the reals and labels held by the reader, which depends on the window and
    block sizes but not on the file length.
    """

    def __init__(self, path: str, features: str = "meanstd", window: int = DEFAULT_WINDOW,
                 bins: int = DEFAULT_BINS, drift: Optional[DriftConfig] = None):
        if features not in FEATURE_PIPELINES:
            raise UsageError(f"unknown feature pipeline {features!r}")
        if window < 1 or bins < 1:
            raise UsageError("window and bins must be >= 1")
        self.path = path
        self.window = window
        self.bins = bins
        self.drift = drift
        self.name = os.path.basename(path)
        self.peak_buffer_bytes = 0
        self._scan(features)
        if drift is not None:
            self._check_drift(drift)

    def _rows(self) -> Iterator[Tuple[int, np.ndarray, int]]:
        with open(self.path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None:
                raise DataError(f"{self.path}:1: empty file")
            width = len(header)
            for row in reader:
                if not row:
                    continue
                values, label = _parse_row(row, width, self.path, reader.line_num)
                yield reader.line_num, values, label

    def _scan(self, features: str) -> None:
        with open(self.path, newline="") as fh:
            header = next(csv.reader(fh), None)
        if header is None:
            raise DataError(f"{self.path}:1: empty file")
        self.kind = _read_header(self.path, header)
        self.axes = len(header) - 1
        if self.kind == "features":
            if features not in ("none", "meanstd"):
                # the default pipeline is harmless on a feature file; others are not
                raise UsageError(f"{self.path} already holds features; use --features none")
            features = "none"
        elif features == "none":
            raise UsageError(f"{self.path} holds raw samples; choose meanstd or histogram")
        self.features = features
        seen = set()
        n_rows = 0
        for _, _, label in self._rows():
            seen.add(label)
            n_rows += 1
        self.n_rows = n_rows
        self.labels = sorted(seen)
        self.label_map = {orig: i for i, orig in enumerate(self.labels)}
        self.ranges = None
        if features == "histogram":
            take = max(1, int(n_rows * HISTOGRAM_RANGE_FRACTION))
            lo = np.full(self.axes, np.inf)
            hi = np.full(self.axes, -np.inf)
            for i, (_, values, _) in enumerate(self._rows()):
                if i >= take:
                    break
                np.minimum(lo, values, out=lo)
                np.maximum(hi, values, out=hi)
            flat = hi <= lo
            lo[flat] -= 0.5
            hi[flat] += 0.5
            self.ranges = np.stack([lo, hi], axis=1)
        if features == "none":
            dim, length = self.axes, n_rows
        else:
            per_axis = 2 if features == "meanstd" else self.bins
            dim, length = per_axis * self.axes, n_rows // self.window
        if length == 0:
            raise DataError(f"{self.path}: no complete instance in the file")
        self.spec = StreamSpec(dim, max(len(self.labels), 2), length)

    def _check_drift(self, cfg: DriftConfig) -> None:
        n, c = self.spec.length, self.spec.num_classes
        if not 0 < cfg.position < n:
            raise UsageError(f"drift position {cfg.position} outside (0, {n})")
        if cfg.shift % c == 0:
            raise UsageError("drift shift is a multiple of the class count (no-op drift)")

    def with_drift(self, cfg: DriftConfig) -> "CsvStream":
        self._check_drift(cfg)
        clone = object.__new__(CsvStream)
        clone.__dict__.update(self.__dict__)
        clone.drift = cfg
        clone.peak_buffer_bytes = 0
        return clone

    def __len__(self) -> int:
        return self.spec.length

    def _account(self, n_reals: int, n_labels: int) -> None:
        used = n_reals * REAL_BYTES + n_labels * COUNTER_BYTES
        self.peak_buffer_bytes = max(self.peak_buffer_bytes, used)

    def _instances(self) -> Iterator[Tuple[np.ndarray, int]]:
        lmap = self.label_map
        if self.features == "none":
            self._account(self.axes, 1)
            for _, values, label in self._rows():
                yield values, lmap[label]
            return
        w = self.window
        samples = np.empty((w, self.axes))
        labels = np.empty(w, dtype=np.int64)
        self._account(w * self.axes, w)
        filled = 0
        for _, values, label in self._rows():
            samples[filled] = values
            labels[filled] = lmap[label]
            filled += 1
            if filled == w:
                win = SampleWindow(samples, labels)
                if self.features == "meanstd":
                    inst = meanstd_features(win)
                else:
                    inst = histogram_features(win, self.bins, self.ranges)
                yield inst.features, inst.label
                filled = 0

    def _labelled(self) -> Iterator[Tuple[np.ndarray, int]]:
        cfg, c = self.drift, self.spec.num_classes
        for i, (x, label) in enumerate(self._instances()):
            if cfg is not None and i >= cfg.position:
                label = (label + cfg.shift) % c
            yield x, label

    def __iter__(self) -> Iterator[Instance]:
        for x, label in self._labelled():
            yield Instance(x, label)

    def iter_blocks(self, size: int) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
        dim = self.spec.dimensionality
        X = np.empty((size, dim))
        y = np.empty(size, dtype=np.int64)
        filled = 0
        for x, label in self._labelled():
            X[filled] = x
            y[filled] = label
            filled += 1
            if filled == size:
                self._account(size * dim + self.window * self.axes, size + self.window)
                yield X.copy(), y.copy()
                filled = 0
        if filled:
            yield X[:filled].copy(), y[:filled].copy()

    def materialize(self) -> ArrayStream:
        """Load every instance into memory (needed e.g. for shuffling)."""
        rows = list(self._labelled())
        X = np.stack([x for x, _ in rows])
        y = np.array([label for _, label in rows], dtype=np.int64)
        return ArrayStream(X, y, self.spec.num_classes, self.name)


def write_csv(stream, path: str) -> int:
    """Write ``stream`` as a feature CSV with round-trip exact reals; returns rows written."""
    dim = stream.spec.dimensionality
    n = 0
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([f"f{i}" for i in range(dim)] + ["label"])
        for x, label in stream:
            writer.writerow([repr(float(v)) for v in x] + [int(label)])
            n += 1
    return n
