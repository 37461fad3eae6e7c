"""Prequential (test-then-train) evaluation and macro-F1 bookkeeping."""

from __future__ import annotations

import math
import statistics
import time
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Tuple

import numpy as np

from .core import DataError, Instance, StreamClassifier, UsageError

REPORT_EVERY = 50


class ConfusionState:
    """Cumulative one-versus-all counters per class.

    A class counts as *encountered* once it has appeared as a true label.
    Predictions of never-labelled classes still add false positives to that
    class, but the class only enters the macro average once it is labelled.
    """

    def __init__(self, n_classes: int):
        self.n_classes = n_classes
        self.tp = [0] * n_classes
        self.fp = [0] * n_classes
        self.fn = [0] * n_classes
        self.encountered = [False] * n_classes
        self.n = 0

    def update_many(self, predicted, truth) -> None:
        """Same as calling ``update`` for each pair in order."""
        predicted = np.asarray(predicted, dtype=np.int64)
        truth = np.asarray(truth, dtype=np.int64)
        c = self.n_classes
        hit = predicted == truth
        wrong = predicted[~hit]
        wrong = wrong[(wrong >= 0) & (wrong < c)]
        for name, values in (("tp", truth[hit]), ("fn", truth[~hit]), ("fp", wrong)):
            counts = getattr(self, name)
            for k, v in enumerate(np.bincount(values, minlength=c).tolist()):
                counts[k] += v
        for k in np.unique(truth).tolist():
            self.encountered[k] = True
        self.n += len(truth)

    def update(self, predicted: int, truth: int) -> None:
        self.n += 1
        self.encountered[truth] = True
        if predicted == truth:
            self.tp[truth] += 1
        else:
            self.fn[truth] += 1
            if 0 <= predicted < self.n_classes:
                self.fp[predicted] += 1

    def class_f1(self, c: int) -> float:
        tp, fp, fn = self.tp[c], self.fp[c], self.fn[c]
        if tp == 0:
            return 0.0
        # harmonic mean of precision and recall with a single rounding step
        return 2.0 * tp / (2.0 * tp + fp + fn)

    def macro_f1(self) -> Optional[float]:
        """Mean F1 over encountered classes, or ``None`` before any label was seen."""
        scores = [self.class_f1(c) for c in range(self.n_classes) if self.encountered[c]]
        if not scores:
            return None
        return math.fsum(scores) / len(scores)


def macro_f1(state: ConfusionState) -> Optional[float]:
    return state.macro_f1()


def macro_f1_score(y_true, y_pred, n_classes: Optional[int] = None) -> Optional[float]:
    """Vectorised macro-F1 over a prediction log, same conventions as ConfusionState."""
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if y_true.size == 0:
        return None
    if n_classes is None:
        n_classes = int(max(y_true.max(), y_pred.max())) + 1
    hit = y_true == y_pred
    tp = np.bincount(y_true[hit], minlength=n_classes)[:n_classes]
    fn = np.bincount(y_true[~hit], minlength=n_classes)[:n_classes]
    wrong_pred = y_pred[~hit]
    wrong_pred = wrong_pred[(wrong_pred >= 0) & (wrong_pred < n_classes)]
    fp = np.bincount(wrong_pred, minlength=n_classes)[:n_classes]
    encountered = np.bincount(y_true, minlength=n_classes)[:n_classes] > 0
    with np.errstate(invalid="ignore", divide="ignore"):
        f1 = np.where(tp > 0, 2.0 * tp / (2.0 * tp + fp + fn), 0.0)
    return math.fsum(f1[encountered].tolist()) / int(encountered.sum())


@dataclass
class RunReport:
    classifier: str
    dataset: str
    seed: int
    timeline: List[Tuple[int, float, int]] = field(default_factory=list)
    runtime_seconds: float = 0.0
    runtime_minus_baseline_seconds: Optional[float] = None
    final_macro_f1: Optional[float] = None
    n_elements: int = 0
    predictions: Optional[np.ndarray] = None
    labels: Optional[np.ndarray] = None

    @property
    def peak_memory_bytes(self) -> int:
        return max((m for _, _, m in self.timeline), default=0)

    def window_f1(self, start: int, stop: int, n_classes: Optional[int] = None) -> Optional[float]:
        """Macro-F1 restricted to elements ``[start, stop)``; needs kept predictions."""
        if self.predictions is None:
            raise UsageError("run was not recorded with keep_predictions=True")
        return macro_f1_score(self.labels[start:stop], self.predictions[start:stop], n_classes)


def prequential_run(
    classifier: StreamClassifier,
    stream: Iterable[Instance],
    report_every: int = REPORT_EVERY,
    classifier_id: Optional[str] = None,
    dataset_id: str = "stream",
    seed: int = 0,
    keep_predictions: bool = False,
) -> RunReport:
    """Test-then-train over ``stream``; checkpoint macro-F1 and memory every ``report_every``.

    Streams exposing ``iter_blocks`` are fed to the classifier one checkpoint
    interval at a time through ``prequential_block``, which keeps per-element
    call overhead out of the timing. Other iterables go element by element.
    """
    if report_every < 1:
        raise UsageError("report_every must be >= 1")
    state = ConfusionState(classifier.n_classes)
    report = RunReport(classifier_id or classifier.name, dataset_id, seed)
    if hasattr(stream, "iter_blocks"):
        return _run_blocks(classifier, stream, report_every, state, report, keep_predictions)
    preds: list = []
    truths: list = []
    predict = classifier.predict
    train = classifier.train
    update = state.update
    n = 0
    start = time.perf_counter()
    for x, label in stream:
        if label is None:
            raise DataError(f"element {n} has no label")
        p = predict(x)
        update(p, label)
        train(x, label)
        n += 1
        if keep_predictions:
            preds.append(p)
            truths.append(label)
        if n % report_every == 0:
            report.timeline.append((n, state.macro_f1(), classifier.memory_bytes()))
    report.runtime_seconds = time.perf_counter() - start
    report.n_elements = n
    report.final_macro_f1 = state.macro_f1()
    if keep_predictions:
        report.predictions = np.asarray(preds, dtype=np.int64)
        report.labels = np.asarray(truths, dtype=np.int64)
    return report


def _run_blocks(classifier, stream, report_every, state, report, keep_predictions):
    preds: list = []
    truths: list = []
    n = 0
    start = time.perf_counter()
    for X, y in stream.iter_blocks(report_every):
        p = classifier.prequential_block(X, y)
        state.update_many(p, y)
        n += len(y)
        if keep_predictions:
            preds.append(p)
            truths.append(np.array(y, dtype=np.int64))
        if n % report_every == 0:
            report.timeline.append((n, state.macro_f1(), classifier.memory_bytes()))
    report.runtime_seconds = time.perf_counter() - start
    report.n_elements = n
    report.final_macro_f1 = state.macro_f1()
    if keep_predictions:
        report.predictions = np.concatenate(preds) if preds else np.empty(0, dtype=np.int64)
        report.labels = np.concatenate(truths) if truths else np.empty(0, dtype=np.int64)
    return report


def runtime_baseline(stream, n_classes: int, reps: int = 1) -> float:
    """Mean prequential wall time of the empty classifier on ``stream``."""
    from .baselines import EmptyClassifier

    if reps < 1:
        raise UsageError("reps must be >= 1")
    dim = stream.spec.dimensionality
    times = [
        prequential_run(EmptyClassifier(dim, n_classes), stream).runtime_seconds
        for _ in range(reps)
    ]
    return statistics.fmean(times)
