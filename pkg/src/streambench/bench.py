"""Repetition orchestration: seeded runs, grid tuning and CSV emission."""

from __future__ import annotations

import csv
import io
import itertools
import os
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .baselines import EmptyClassifier, offline_knn_evaluate
from .core import (SEED_CLASSIFIER, SEED_GENERATOR, SEED_SHUFFLE, ArrayStream, UsageError,
                   derive_seed)
from .datasets import CsvStream, DatasetRef, open_dataset, parse_dataset_id
from .evaluation import REPORT_EVERY, RunReport, prequential_run
from .features import (DEFAULT_BINS, DEFAULT_WINDOW, DriftConfig, inject_drift, midpoint_drift,
                       shuffle_stream)
from .registry import (CLASSIFIERS, OFFLINE_CLASSIFIERS, PretrainSpec, build_classifier,
                       convert_params, knn_params)

TIMELINE_COLUMNS = ["classifier", "dataset", "seed", "elements", "macro_f1", "memory_bytes"]
SUMMARY_COLUMNS = ["classifier", "dataset", "reps", "final_f1_mean", "final_f1_std",
                   "runtime_s_mean", "net_runtime_s_mean", "peak_memory_bytes"]
THREADS_ENV = "STREAMBENCH_THREADS"


@dataclass(frozen=True)
class BenchConfig:
    dataset: str
    classifier: str
    params: Dict[str, str] = field(default_factory=dict)
    reps: int = 1
    seed: int = 0
    drift: Optional[str] = None
    shuffle: bool = False
    features: str = "meanstd"
    window: int = DEFAULT_WINDOW
    bins: int = DEFAULT_BINS
    timing: bool = True
    workers: Optional[int] = None

    def validate(self) -> DatasetRef:
        if self.reps < 1:
            raise UsageError("reps must be >= 1")
        if self.classifier not in CLASSIFIERS:
            raise UsageError(f"unknown classifier {self.classifier!r}; "
                             f"choose from {', '.join(CLASSIFIERS)}")
        convert_params(self.classifier, self.params)
        ref = parse_dataset_id(self.dataset)
        if self.drift is not None:
            parse_drift(self.drift, 2)
        return ref


def parse_drift(text: str, length: int) -> DriftConfig:
    """``mid``, ``<position>``, ``mid:<shift>`` or ``<position>:<shift>``."""
    where, _, shift = text.partition(":")
    try:
        shift_v = int(shift) if shift else 1
        if where in ("", "mid"):
            return midpoint_drift(length, shift_v) if length > 1 else DriftConfig(1, shift_v)
        return DriftConfig(int(where), shift_v)
    except ValueError:
        raise UsageError(f"drift expects mid[:shift] or <position>[:shift], got {text!r}") from None


def worker_count(reps: int, requested: Optional[int] = None) -> int:
    cap = os.cpu_count() or 1
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            cap = max(1, int(env))
        except ValueError:
            raise UsageError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
    if requested is not None:
        cap = min(cap, max(1, requested))
    return max(1, min(cap, reps))


def prepare_stream(cfg: BenchConfig, ref: DatasetRef, rep_seed: int):
    """Dataset for one repetition: generate or open, then shuffle and drift as configured."""
    stream = open_dataset(ref, derive_seed(rep_seed, SEED_GENERATOR), cfg.features,
                          cfg.window, cfg.bins)
    if cfg.shuffle:
        if isinstance(stream, CsvStream):
            stream = stream.materialize()
        stream = shuffle_stream(stream, derive_seed(rep_seed, SEED_SHUFFLE))
    if cfg.drift is not None:
        drift = parse_drift(cfg.drift, len(stream))
        if isinstance(stream, CsvStream):
            stream = stream.with_drift(drift)
        else:
            stream = inject_drift(stream, drift, stream.spec.num_classes)
    return stream


def _pretrain_loader(cfg: BenchConfig):
    def load(spec: PretrainSpec, seed: int):
        src = open_dataset(parse_dataset_id(spec.path), seed, cfg.features, cfg.window, cfg.bins)
        if isinstance(src, CsvStream):
            src = src.materialize()
        rng = np.random.default_rng(derive_seed(seed, SEED_SHUFFLE))
        n = max(1, int(round(spec.fraction * len(src))))
        idx = np.sort(rng.choice(len(src), size=n, replace=False))
        return src.X[idx], src.y[idx]
    return load


def run_repetition(cfg: BenchConfig, rep: int) -> Tuple[RunReport, Optional[float]]:
    """One repetition; returns the report and the empty-classifier runtime on the same stream."""
    ref = cfg.validate()
    rep_seed = cfg.seed + rep
    stream = prepare_stream(cfg, ref, rep_seed)
    spec = stream.spec
    clf_seed = derive_seed(rep_seed, SEED_CLASSIFIER)
    if cfg.classifier in OFFLINE_CLASSIFIERS:
        if isinstance(stream, CsvStream):
            stream = stream.materialize()
        start = time.perf_counter()
        f1, model = offline_knn_evaluate(stream, knn_params(cfg.params, clf_seed))
        report = RunReport(cfg.classifier, cfg.dataset, rep_seed)
        report.runtime_seconds = time.perf_counter() - start
        report.final_macro_f1 = f1
        report.n_elements = len(stream)
        mem = model.X.size * 8 + model.y.size * 4
        report.timeline.append((len(stream), f1, mem))
        return report, None
    clf = build_classifier(cfg.classifier, spec.dimensionality, spec.num_classes, cfg.params,
                           clf_seed, _pretrain_loader(cfg))
    report = prequential_run(clf, stream, REPORT_EVERY, cfg.classifier, cfg.dataset, rep_seed)
    base = None
    if cfg.timing:
        empty = EmptyClassifier(spec.dimensionality, spec.num_classes)
        base = prequential_run(empty, stream).runtime_seconds
        report.runtime_minus_baseline_seconds = report.runtime_seconds - base
    return report, base


def _run_one(args):
    cfg, rep = args
    return run_repetition(cfg, rep)


def run_bench(cfg: BenchConfig) -> List[RunReport]:
    """All repetitions, ordered by repetition index regardless of worker scheduling."""
    cfg.validate()
    jobs = [(cfg, r) for r in range(cfg.reps)]
    workers = worker_count(cfg.reps, cfg.workers)
    if workers == 1:
        results = [_run_one(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_one, jobs))
    return [r for r, _ in results]


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def summarize(reports: Sequence[RunReport], timing: bool = True) -> Dict[str, object]:
    f1s = [r.final_macro_f1 for r in reports if r.final_macro_f1 is not None]
    row: Dict[str, object] = {
        "classifier": reports[0].classifier,
        "dataset": reports[0].dataset,
        "reps": len(reports),
        "final_f1_mean": statistics.fmean(f1s) if f1s else None,
        "final_f1_std": statistics.pstdev(f1s) if f1s else None,
        "runtime_s_mean": None,
        "net_runtime_s_mean": None,
        "peak_memory_bytes": max(r.peak_memory_bytes for r in reports),
    }
    if timing:
        row["runtime_s_mean"] = statistics.fmean(r.runtime_seconds for r in reports)
        nets = [r.runtime_minus_baseline_seconds for r in reports
                if r.runtime_minus_baseline_seconds is not None]
        row["net_runtime_s_mean"] = statistics.fmean(nets) if nets else None
    return row


def timeline_csv(reports: Sequence[RunReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TIMELINE_COLUMNS)
    for r in reports:
        for n, f1, mem in r.timeline:
            w.writerow([r.classifier, r.dataset, r.seed, n, _fmt(f1), mem])
    return buf.getvalue()


def mean_timeline_csv(reports: Sequence[RunReport]) -> str:
    """Per-checkpoint means across repetitions."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["classifier", "dataset", "reps", "elements", "macro_f1_mean", "memory_bytes_mean"])
    length = min(len(r.timeline) for r in reports)
    for i in range(length):
        n = reports[0].timeline[i][0]
        f1s = [r.timeline[i][1] for r in reports if r.timeline[i][1] is not None]
        mems = [r.timeline[i][2] for r in reports]
        w.writerow([reports[0].classifier, reports[0].dataset, len(reports), n,
                    _fmt(statistics.fmean(f1s) if f1s else None), _fmt(statistics.fmean(mems))])
    return buf.getvalue()


def summary_csv(rows: Sequence[Dict[str, object]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_COLUMNS)
    for row in rows:
        w.writerow([_fmt(row[c]) for c in SUMMARY_COLUMNS])
    return buf.getvalue()


def expand_grid(axes: Sequence[Tuple[str, Sequence[str]]]) -> List[Dict[str, str]]:
    """Cartesian product in the given key order, last key varying fastest."""
    if not axes or any(len(values) == 0 for _, values in axes):
        raise UsageError("parameter grid is empty")
    keys = [k for k, _ in axes]
    return [dict(zip(keys, combo)) for combo in itertools.product(*(v for _, v in axes))]


def tune_grid(cfg: BenchConfig, grid: Sequence[Dict[str, str]]):
    """Evaluate every grid point on ``cfg`` and pick the best mean final macro-F1.

    Grid points override ``cfg.params``. Ties go to the earliest point. Returns
    ``(best_params, rows)`` where each row is ``(index, params, f1_mean)``.
    """
    if not grid:
        raise UsageError("parameter grid is empty")
    rows = []
    best_idx, best_f1 = 0, -np.inf
    for i, point in enumerate(grid):
        params = {**cfg.params, **point}
        reports = run_bench(replace(cfg, params=params, timing=False))
        f1 = summarize(reports, timing=False)["final_f1_mean"]
        score = -np.inf if f1 is None else f1
        rows.append((i, params, f1))
        if score > best_f1:
            best_idx, best_f1 = i, score
    return rows[best_idx][1], rows


def grid_csv(rows, keys: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["point", *keys, "final_f1_mean"])
    for i, params, f1 in rows:
        w.writerow([i, *(params.get(k, "") for k in keys), _fmt(f1)])
    return buf.getvalue()


def materialize_synthetic(dataset: str, seed: int = 0) -> ArrayStream:
    ref = parse_dataset_id(dataset)
    if ref.kind != "synth":
        raise UsageError("gen needs a synth: dataset id")
    return open_dataset(ref, derive_seed(seed, SEED_GENERATOR))
