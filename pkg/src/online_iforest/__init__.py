"""Streaming anomaly detection with an online isolation forest.

The package is organized around three layers: :mod:`online_iforest.forest`
holds the per-point learn/forget/score state machine, :mod:`online_iforest.metrics`
evaluates score streams against ground truth, and :mod:`online_iforest.ingest`
turns labeled CSV files into single-pass streams. A thin benchmark CLI lives
in :mod:`online_iforest.cli` (``online-iforest`` once installed).
"""

from .forest import (
    ForestConfig,
    ForestStats,
    Hyperrectangle,
    Node,
    OnlineIForest,
    OnlineITree,
    forget_point,
    learn_point,
    merge_children,
    point_depth,
    score_from_depth,
    split_leaf,
)
from .ingest import LabeledStream, batches, load_csv, shuffle
from .metrics import ScoreRecord, roc_auc, windowed_auc

__version__ = "0.1.0"

__all__ = [
    "ForestConfig",
    "ForestStats",
    "Hyperrectangle",
    "LabeledStream",
    "Node",
    "OnlineIForest",
    "OnlineITree",
    "ScoreRecord",
    "batches",
    "forget_point",
    "learn_point",
    "load_csv",
    "merge_children",
    "point_depth",
    "roc_auc",
    "score_from_depth",
    "shuffle",
    "split_leaf",
    "windowed_auc",
]
