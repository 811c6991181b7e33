"""Evaluation of anomaly-score streams against binary ground truth.

Both metrics are rank-based with half credit for tied scores, so they are
exact Mann-Whitney statistics rather than approximations from a thresholded
curve. That matters here: scores coming out of coarse histogram trees tie
frequently, especially early in a stream.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.stats import rankdata

__all__ = ["ScoreRecord", "roc_auc", "windowed_auc"]


@dataclass(frozen=True)
class ScoreRecord:
    """One scored stream element: arrival index, score, ground-truth label."""

    index: int
    score: float
    label: int


def _as_arrays(records: Sequence[ScoreRecord]):
    n = len(records)
    indices = np.empty(n, dtype=np.int64)
    scores = np.empty(n, dtype=np.float64)
    labels = np.empty(n, dtype=np.int64)
    for i, rec in enumerate(records):
        indices[i] = rec.index
        scores[i] = rec.score
        labels[i] = rec.label
    if n and not np.isfinite(scores).all():
        raise ValueError("scores must be finite")
    if n and not np.isin(labels, (0, 1)).all():
        raise ValueError("labels must be 0 (genuine) or 1 (anomaly)")
    return indices, scores, labels


def roc_auc(records: Sequence[ScoreRecord]) -> float:
    """ROC AUC of anomaly scores, ties counted half.

    Computed as the Mann-Whitney U statistic normalized by the number of
    (anomaly, genuine) pairs; equivalent to trapezoidal integration of the
    ROC curve. Raises ValueError when only one label class is present.
    """
    _, scores, labels = _as_arrays(records)
    positive = labels == 1
    num_pos = int(positive.sum())
    num_neg = len(records) - num_pos
    if num_pos == 0 or num_neg == 0:
        raise ValueError("AUC undefined: records contain a single label class")
    ranks = rankdata(scores)  # average ranks give half credit to ties
    wins = ranks[positive].sum() - num_pos * (num_pos + 1) / 2.0
    return float(wins / (num_pos * num_neg))


class _Fenwick:
    """Prefix-sum tree over compressed score ranks (1-based)."""

    __slots__ = ("size", "tree")

    def __init__(self, size: int) -> None:
        self.size = size
        self.tree = [0] * (size + 1)

    def add(self, i: int, delta: int) -> None:
        tree = self.tree
        while i <= self.size:
            tree[i] += delta
            i += i & -i

    def prefix(self, i: int) -> int:
        tree = self.tree
        total = 0
        while i > 0:
            total += tree[i]
            i -= i & -i
        return total


def windowed_auc(
    records: Sequence[ScoreRecord], window: int
) -> list[tuple[int, float | None]]:
    """Centered sliding-window ROC AUC for non-stationary streams.

    For every record index ``t`` the AUC is computed over the records whose
    index lies in ``[t - window/2, t + window/2]``; windows are truncated at
    the stream boundaries, never padded. Where the window holds a single
    label class the AUC is undefined and reported as None.

    The window slides with the record order, so the pair statistic is
    maintained incrementally (doubled and kept integral for exactness) with
    two Fenwick trees over the compressed score ranks; the whole sweep costs
    O(n log n) instead of one rank sort per window.
    """
    if window < 2:
        raise ValueError(f"window must be >= 2, got {window}")
    indices, scores, labels = _as_arrays(records)
    n = len(records)
    if n == 0:
        return []
    if n > 1 and not (np.diff(indices) > 0).all():
        raise ValueError("record indices must be strictly increasing")

    distinct, inverse = np.unique(scores, return_inverse=True)
    ranks = (inverse + 1).tolist()  # 1-based for the Fenwick trees
    label_list = labels.tolist()
    pos_tree = _Fenwick(len(distinct))
    neg_tree = _Fenwick(len(distinct))
    num_pos = 0
    num_neg = 0
    doubled_wins = 0  # 2 * (#strict wins) + (#ties) over current window pairs

    def add(i: int) -> None:
        nonlocal num_pos, num_neg, doubled_wins
        r = ranks[i]
        if label_list[i]:
            doubled_wins += neg_tree.prefix(r) + neg_tree.prefix(r - 1)
            pos_tree.add(r, 1)
            num_pos += 1
        else:
            doubled_wins += 2 * num_pos - pos_tree.prefix(r) - pos_tree.prefix(r - 1)
            neg_tree.add(r, 1)
            num_neg += 1

    def remove(i: int) -> None:
        nonlocal num_pos, num_neg, doubled_wins
        r = ranks[i]
        if label_list[i]:
            doubled_wins -= neg_tree.prefix(r) + neg_tree.prefix(r - 1)
            pos_tree.add(r, -1)
            num_pos -= 1
        else:
            doubled_wins -= 2 * num_pos - pos_tree.prefix(r) - pos_tree.prefix(r - 1)
            neg_tree.add(r, -1)
            num_neg -= 1

    half = window / 2.0
    index_list = indices.tolist()
    out: list[tuple[int, float | None]] = []
    left = 0
    right = 0
    for center in index_list:
        while left < n and index_list[left] < center - half:
            remove(left)
            left += 1
        while right < n and index_list[right] <= center + half:
            add(right)
            right += 1
        if num_pos and num_neg:
            out.append((center, doubled_wins / (2.0 * num_pos * num_neg)))
        else:
            out.append((center, None))
    return out
