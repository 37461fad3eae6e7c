"""Command-line front end: ``streambench run | tune | gen``."""

from __future__ import annotations

import argparse
import sys
from typing import List, Optional

from .bench import (BenchConfig, expand_grid, grid_csv, materialize_synthetic, mean_timeline_csv,
                    run_bench, summarize, summary_csv, timeline_csv, tune_grid)
from .core import ConfigurationError, DataError, StreamBenchError, UsageError
from .datasets import FEATURE_PIPELINES, write_csv
from .features import DEFAULT_BINS, DEFAULT_WINDOW
from .registry import CLASSIFIERS, parse_params

EXIT_DATA_ERROR = 1
EXIT_USAGE_ERROR = 2


def _emit(text: str, path: Optional[str]) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dataset", required=True,
                   help="synth:<hyperplane|randomrbf|randomtree>[,seed=N,n=N,...] or a CSV path")
    p.add_argument("--classifier", required=True, choices=CLASSIFIERS)
    p.add_argument("--params", default="", help="comma-separated key=value classifier parameters")
    p.add_argument("--reps", type=int, default=1)
    p.add_argument("--seed", type=int, default=0, help="base seed; repetition r uses seed+r")
    p.add_argument("--drift", nargs="?", const="mid", default=None,
                   help="label-shift drift: mid[:shift] or <position>[:shift] (default mid)")
    p.add_argument("--shuffle", action="store_true", help="shuffle the stream per repetition")
    p.add_argument("--features", choices=FEATURE_PIPELINES, default="meanstd",
                   help="feature pipeline for raw sample CSVs")
    p.add_argument("--window", type=int, default=DEFAULT_WINDOW)
    p.add_argument("--bins", type=int, default=DEFAULT_BINS)
    p.add_argument("--workers", type=int, default=None,
                   help="parallel repetitions (also capped by STREAMBENCH_THREADS)")


def _config(args, timing: bool = True) -> BenchConfig:
    return BenchConfig(
        dataset=args.dataset, classifier=args.classifier, params=parse_params(args.params),
        reps=args.reps, seed=args.seed, drift=args.drift, shuffle=args.shuffle,
        features=args.features, window=args.window, bins=args.bins, timing=timing,
        workers=args.workers,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="streambench",
                                     description="Prequential benchmark of online classifiers.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="evaluate one classifier on one dataset")
    _add_common(run)
    run.add_argument("--timeline", help="per-checkpoint CSV output path")
    run.add_argument("--timeline-mean", help="checkpoint means across repetitions, CSV path")
    run.add_argument("--summary", default="-", help="summary CSV output path (default stdout)")
    run.add_argument("--timing", choices=("on", "off"), default="on",
                     help="off leaves runtime columns blank so outputs are reproducible bytewise")

    tune = sub.add_parser("tune", help="grid search maximising final macro-F1")
    _add_common(tune)
    tune.add_argument("--grid", action="append", default=[], metavar="KEY=V1,V2,...",
                      help="one grid axis; repeat for more axes")
    tune.add_argument("--out", default=None, help="grid results CSV path")

    gen = sub.add_parser("gen", help="write a synthetic dataset as a feature CSV")
    gen.add_argument("--dataset", required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)
    return parser


def _parse_axes(specs: List[str]):
    axes = []
    for spec in specs:
        key, sep, values = spec.partition("=")
        if not sep or not key:
            raise UsageError(f"grid axis must look like key=v1,v2; got {spec!r}")
        axes.append((key.strip(), [v.strip() for v in values.split(",") if v.strip()]))
    return axes


def cmd_run(args) -> int:
    cfg = _config(args, timing=args.timing == "on")
    reports = run_bench(cfg)
    if args.timeline:
        _emit(timeline_csv(reports), args.timeline)
    if args.timeline_mean:
        _emit(mean_timeline_csv(reports), args.timeline_mean)
    _emit(summary_csv([summarize(reports, cfg.timing)]), args.summary)
    return 0


def cmd_tune(args) -> int:
    axes = _parse_axes(args.grid)
    grid = expand_grid(axes)
    best, rows = tune_grid(_config(args, timing=False), grid)
    keys = list(dict.fromkeys([*parse_params(args.params), *(k for k, _ in axes)]))
    if args.out:
        _emit(grid_csv(rows, keys), args.out)
    print(",".join(f"{k}={v}" for k, v in best.items()))
    return 0


def cmd_gen(args) -> int:
    stream = materialize_synthetic(args.dataset, args.seed)
    n = write_csv(stream, args.out)
    print(f"wrote {n} rows to {args.out}", file=sys.stderr)
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"run": cmd_run, "tune": cmd_tune, "gen": cmd_gen}[args.command]
    try:
        return handler(args)
    except (UsageError, ConfigurationError) as exc:
        print(f"streambench: error: {exc}", file=sys.stderr)
        return EXIT_USAGE_ERROR
    except DataError as exc:
        print(f"streambench: data error: {exc}", file=sys.stderr)
        return EXIT_DATA_ERROR
    except StreamBenchError as exc:
        print(f"streambench: error: {exc}", file=sys.stderr)
        return EXIT_DATA_ERROR


if __name__ == "__main__":
    sys.exit(main())
