"""Memory-constrained online classifiers and a prequential benchmark harness."""

from .baselines import EmptyClassifier, KnnModel, knn_fit_gridsearch, offline_knn_evaluate
from .core import (ArrayStream, ConfigurationError, DataError, FnnParams, HoeffdingParams,
                   Instance, KnnParams, McnnParams, MondrianParams, NaiveBayesParams,
                   StreamBenchError, StreamClassifier, StreamSpec, UsageError)
from .evaluation import ConfusionState, RunReport, macro_f1, macro_f1_score, prequential_run
from .fnn import FeedForwardNetwork
from .hoeffding import HoeffdingTree
from .mcnn import MicroClusterNN
from .mondrian import MondrianForest
from .naive_bayes import NaiveBayes

__version__ = "0.1.0"

__all__ = [
    "ArrayStream", "ConfigurationError", "ConfusionState", "DataError", "EmptyClassifier",
    "FeedForwardNetwork", "FnnParams", "HoeffdingParams", "HoeffdingTree", "Instance",
    "KnnModel", "KnnParams", "McnnParams", "MicroClusterNN", "MondrianForest", "MondrianParams",
    "NaiveBayes", "NaiveBayesParams", "RunReport", "StreamBenchError", "StreamClassifier",
    "StreamSpec", "UsageError", "knn_fit_gridsearch", "macro_f1", "macro_f1_score",
    "offline_knn_evaluate", "prequential_run",
]
