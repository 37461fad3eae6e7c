"""Classifier construction from CLI names and ``key=value`` parameter strings."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from .baselines import EmptyClassifier
from .core import (FnnParams, HoeffdingParams, KnnParams, McnnParams, MondrianParams,
                   NaiveBayesParams, StreamClassifier, UsageError)
from .fnn import FeedForwardNetwork
from .hoeffding import HoeffdingTree
from .mcnn import MicroClusterNN
from .mondrian import MondrianForest
from .naive_bayes import NaiveBayes

STREAM_CLASSIFIERS = ("empty", "nb", "ht", "mf", "mcnn-origin", "mcnn-orpaillecc", "fnn")
OFFLINE_CLASSIFIERS = ("knn-offline",)
CLASSIFIERS = STREAM_CLASSIFIERS + OFFLINE_CLASSIFIERS


def parse_params(text: Optional[str]) -> Dict[str, str]:
    """``"a=1,b=2"`` -> ``{"a": "1", "b": "2"}``; later keys win."""
    out: Dict[str, str] = {}
    if not text:
        return out
    for pair in text.split(","):
        pair = pair.strip()
        if not pair:
            continue
        key, sep, value = pair.partition("=")
        if not sep or not key.strip():
            raise UsageError(f"expected key=value, got {pair!r}")
        out[key.strip()] = value.strip()
    return out


def _hidden(text: str) -> Tuple[int, ...]:
    parts = [p for p in text.replace("-", "x").split("x") if p]
    if not parts:
        raise ValueError(text)
    return tuple(int(p) for p in parts)


# CLI key -> (dataclass field, converter), per classifier
_FIELDS: Dict[str, Dict[str, Tuple[str, Callable]]] = {
    "empty": {},
    "nb": {"var_floor": ("var_floor", float)},
    "ht": {
        "delta": ("delta", float),
        "grace": ("grace_period", int),
        "tie_epsilon": ("tie_epsilon", float),
        "thresholds": ("n_thresholds", int),
        "leaf": ("leaf_learner", str),
    },
    "mf": {
        "trees": ("tree_count", int),
        "base": ("base_count", float),
        "discount": ("discount_factor", float),
        "budget": ("budget", float),
        "mem_kb": ("memory_bytes", lambda v: int(round(float(v) * 1024))),
        "mem_bytes": ("memory_bytes", int),
        "seed": ("seed", int),
    },
    "mcnn": {
        "error_threshold": ("error_threshold", int),
        "participation_threshold": ("participation_threshold", int),
        "max_clusters": ("max_clusters", int),
    },
    "fnn": {
        "hidden": ("hidden", _hidden),
        "lr": ("learning_rate", float),
        "seed": ("seed", int),
        "pretrain": ("pretrain", str),
    },
    "knn-offline": {
        "k_min": ("k_min", int),
        "k_max": ("k_max", int),
        "train_fraction": ("train_fraction", float),
        "validation_fraction": ("validation_fraction", float),
        "seed": ("seed", int),
    },
}


def _family(name: str) -> str:
    if name not in CLASSIFIERS:
        raise UsageError(f"unknown classifier {name!r}; choose from {', '.join(CLASSIFIERS)}")
    return "mcnn" if name.startswith("mcnn-") else name


def convert_params(name: str, raw: Dict[str, str]) -> Dict[str, object]:
    """Map CLI keys to typed dataclass fields, rejecting unknown keys and bad values."""
    fields = _FIELDS[_family(name)]
    out: Dict[str, object] = {}
    for key, value in raw.items():
        if key not in fields:
            known = ", ".join(sorted(fields)) or "none"
            raise UsageError(f"{name} has no parameter {key!r} (accepted: {known})")
        target, conv = fields[key]
        try:
            out[target] = conv(value)
        except ValueError:
            raise UsageError(f"{name}: bad value {value!r} for {key}") from None
    return out


@dataclass(frozen=True)
class PretrainSpec:
    path: str
    epochs: int
    fraction: float


def parse_pretrain(text: str) -> PretrainSpec:
    """``<path>:<epochs>:<fraction>``; the path may itself contain colons."""
    path, sep1, rest = text.rpartition(":")
    path, sep2, epochs = path.rpartition(":")
    if not (sep1 and sep2 and path):
        raise UsageError(f"pretrain expects <path>:<epochs>:<fraction>, got {text!r}")
    try:
        spec = PretrainSpec(path, int(epochs), float(rest))
    except ValueError:
        raise UsageError(f"pretrain expects integer epochs and real fraction, got {text!r}") from None
    if spec.epochs < 0 or not 0.0 < spec.fraction <= 1.0:
        raise UsageError("pretrain needs epochs >= 0 and fraction in (0, 1]")
    return spec


def knn_params(raw: Dict[str, str], seed: int) -> KnnParams:
    p = convert_params("knn-offline", raw)
    lo = p.pop("k_min", 2)
    hi = p.pop("k_max", 20)
    p.setdefault("seed", seed)
    return KnnParams(k_range=(lo, hi), **p)


def build_classifier(name: str, n_features: int, n_classes: int,
                     raw: Optional[Dict[str, str]] = None, seed: int = 0,
                     pretrain_loader: Optional[Callable[[PretrainSpec, int], tuple]] = None,
                     ) -> StreamClassifier:
    """Instantiate a stream classifier by CLI name.

    ``seed`` seeds randomised classifiers unless ``raw`` pins one. For ``fnn``
    with a ``pretrain`` parameter, ``pretrain_loader(spec, seed)`` must return
    the ``(X, y)`` sample to pretrain on.
    """
    if name in OFFLINE_CLASSIFIERS:
        raise UsageError(f"{name} is an offline baseline, not a stream classifier")
    p = convert_params(name, raw or {})
    if name == "empty":
        return EmptyClassifier(n_features, n_classes)
    if name == "nb":
        return NaiveBayes(n_features, n_classes, NaiveBayesParams(**p))
    if name == "ht":
        nb = NaiveBayesParams()
        return HoeffdingTree(n_features, n_classes, HoeffdingParams(**p), nb)
    if name == "mf":
        p.setdefault("seed", seed)
        return MondrianForest(n_features, n_classes, MondrianParams(**p))
    if name.startswith("mcnn-"):
        return MicroClusterNN(n_features, n_classes,
                              McnnParams(variant=name[len("mcnn-"):], **p))
    # fnn
    pretrain = p.pop("pretrain", None)
    p.setdefault("seed", seed)
    model = FeedForwardNetwork(n_features, n_classes, FnnParams(**p))
    if pretrain is not None:
        spec = parse_pretrain(pretrain)
        if pretrain_loader is None:
            raise UsageError("fnn pretraining needs a data loader")
        X, y = pretrain_loader(spec, seed)
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != n_features:
            raise UsageError(f"pretraining data has shape {X.shape}, expected (*, {n_features})")
        model.pretrain(X, np.asarray(y, dtype=np.int64), spec.epochs, seed)
    return model
