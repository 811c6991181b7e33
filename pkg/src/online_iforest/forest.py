"""Online isolation forest: streaming anomaly scores from histogram trees.

The detector keeps an ensemble of trees. Each tree is a d-dimensional
histogram whose bins (nodes) carry a point count (``height``) and the minimal
axis-aligned hyperrectangle enclosing the points attributed to them
(``support``). Every arriving point is learned by all trees; once the sliding
buffer holds ``window_size`` points, each new arrival also evicts and forgets
the oldest one. Bins in dense regions fill up and split, raising local
resolution; bins in regions the stream has left behind drain and merge back
into their parent, lowering it. The structure therefore tracks the current
data distribution without ever replaying old points.

Scoring follows the isolation principle: a point falling into a shallow leaf
was easy to separate from the bulk of recent data and is likely anomalous.
The anomaly score is ``2 ** (-mean_depth / normalizer)`` with ``mean_depth``
averaged over the ensemble, so scores live in [0, 1] and equal 1 exactly when
every tree isolates the point at depth 0.

Splitting a full leaf does not replay stored points (none are kept): instead
the leaf's occupancy is re-sampled uniformly from its support hyperrectangle
and the synthetic sample initializes the two children. Because forgetting
later walks the *actual* points down whatever structure exists at that time,
child heights may drift negative; heights are signed on purpose and the merge
guard is the cleanup mechanism. Clamping them would silently break the exact
height-conservation invariant (every internal node's height equals the sum of
its children's).
"""

from __future__ import annotations

import math
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "ForestConfig",
    "ForestStats",
    "Hyperrectangle",
    "Node",
    "OnlineIForest",
    "OnlineITree",
    "forget_point",
    "learn_point",
    "merge_children",
    "point_depth",
    "score_from_depth",
    "split_leaf",
]

_SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class ForestConfig:
    """Run parameters of an online isolation forest.

    Attributes:
        num_trees: Ensemble size.
        window_size: Capacity of the sliding buffer; also the number of
            points each tree effectively models at any time.
        max_leaf_samples: Occupancy at which a depth-0 leaf splits. A leaf at
            depth k splits at ``max_leaf_samples * 2**k``, so deeper bins need
            exponentially more mass, which keeps trees compact.
        master_seed: 64-bit seed from which every tree derives its own
            independent random stream.
        depth_limit: Derived, ``log2(window_size / max_leaf_samples)``. Leaves
            at depth >= depth_limit never split.
        normalizer: Derived, same value as depth_limit; divides the mean leaf
            depth in the score exponent so that an averagely-deep point maps
            to score 0.5.
    """

    num_trees: int = 32
    window_size: int = 2048
    max_leaf_samples: int = 32
    master_seed: int = 0
    depth_limit: float = field(init=False)
    normalizer: float = field(init=False)

    def __post_init__(self) -> None:
        if self.num_trees < 1:
            raise ValueError(f"num_trees must be positive, got {self.num_trees}")
        if self.window_size < 1:
            raise ValueError(f"window_size must be positive, got {self.window_size}")
        if self.max_leaf_samples < 1:
            raise ValueError(
                f"max_leaf_samples must be positive, got {self.max_leaf_samples}"
            )
        if self.window_size < self.max_leaf_samples:
            raise ValueError(
                "window_size < max_leaf_samples "
                f"({self.window_size} < {self.max_leaf_samples}): "
                "the depth limit would be negative and no split could ever occur"
            )
        # One double-precision evaluation shared by both derived fields.
        limit = math.log2(self.window_size / self.max_leaf_samples)
        object.__setattr__(self, "depth_limit", limit)
        object.__setattr__(self, "normalizer", limit)


@dataclass(frozen=True)
class Hyperrectangle:
    """Axis-aligned box ``[lower[i], upper[i]]`` per dimension.

    Zero-width intervals are allowed; a box around a single point is
    degenerate in every dimension.
    """

    lower: tuple[float, ...]
    upper: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.lower) != len(self.upper):
            raise ValueError("lower and upper must have the same dimension")
        for lo, hi in zip(self.lower, self.upper):
            if not lo <= hi:
                raise ValueError(f"invalid interval [{lo}, {hi}]")

    @property
    def dimension(self) -> int:
        return len(self.lower)

    def contains(self, other: "Hyperrectangle") -> bool:
        return all(a <= b for a, b in zip(self.lower, other.lower)) and all(
            a >= b for a, b in zip(self.upper, other.upper)
        )


class Node:
    """One histogram bin: signed occupancy, support box, and optional split.

    ``lower``/``upper`` are plain float lists (or None while the bin has never
    seen a point); they are kept raw rather than wrapped because the learn
    path expands them once per visited node per point. A node is internal iff
    ``split_dim`` is not None, in which case ``split_value`` and both children
    are set and children sit at ``depth + 1``.
    """

    __slots__ = (
        "height",
        "lower",
        "upper",
        "depth",
        "split_dim",
        "split_value",
        "left",
        "right",
    )

    def __init__(self, depth: int = 0) -> None:
        self.height: int = 0
        self.lower: list[float] | None = None
        self.upper: list[float] | None = None
        self.depth: int = depth
        self.split_dim: int | None = None
        self.split_value: float | None = None
        self.left: Node | None = None
        self.right: Node | None = None

    @property
    def is_leaf(self) -> bool:
        return self.split_dim is None

    @property
    def support(self) -> Hyperrectangle | None:
        if self.lower is None:
            return None
        return Hyperrectangle(tuple(self.lower), tuple(self.upper))

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        kind = "leaf" if self.is_leaf else f"split(d{self.split_dim}@{self.split_value:g})"
        return f"Node(depth={self.depth}, height={self.height}, {kind})"


def learn_point(x, node: Node, max_leaf_samples: int, depth_limit: float, rng) -> None:
    """Walk ``x`` from ``node`` to its leaf, growing counts and supports.

    Every visited node gains one unit of height and has its support expanded
    to cover ``x`` (a never-touched node gets the degenerate box at ``x``).
    If the terminal leaf reaches its occupancy cap and sits above the depth
    limit, it splits in place; the point is not pushed into the new children,
    whose state comes entirely from the synthetic initialization sample.
    """
    while True:
        node.height += 1
        lo = node.lower
        if lo is None:
            node.lower = list(x)
            node.upper = list(x)
        else:
            up = node.upper
            for i, v in enumerate(x):
                if v < lo[i]:
                    lo[i] = v
                elif v > up[i]:
                    up[i] = v
        q = node.split_dim
        if q is None:
            if node.height >= (max_leaf_samples << node.depth) and node.depth < depth_limit:
                split_leaf(node, rng)
            return
        node = node.left if x[q] < node.split_value else node.right


def split_leaf(node: Node, rng) -> None:
    """Turn a full leaf into an internal node with two freshly seeded children.

    Draws a split dimension uniformly over the support's axes and a split
    value uniformly inside that axis interval, then replaces the leaf's mass
    with an equal-size uniform sample from its support, partitioned strictly
    by ``coordinate < split_value``. Child supports are the minimal boxes of
    their partitions, so an empty partition yields a height-0 child with no
    support (legal, and routine when the split axis is degenerate). The
    sample only initializes the children and is dropped afterwards.
    """
    lower = node.lower
    upper = node.upper
    dim = len(lower)
    split_dim = int(rng.integers(dim))
    split_value = float(rng.uniform(lower[split_dim], upper[split_dim]))
    # Occupancy equals max_leaf_samples * 2**depth when invoked from
    # learn_point; re-sampling exactly that many points preserves the exact
    # height-conservation invariant.
    sample = rng.uniform(lower, upper, size=(node.height, dim))
    in_left = sample[:, split_dim] < split_value
    node.split_dim = split_dim
    node.split_value = split_value
    node.left = _child_from_sample(sample[in_left], node.depth + 1)
    node.right = _child_from_sample(sample[~in_left], node.depth + 1)


def _child_from_sample(sample: np.ndarray, depth: int) -> Node:
    child = Node(depth)
    child.height = sample.shape[0]
    if child.height:
        child.lower = sample.min(axis=0).tolist()
        child.upper = sample.max(axis=0).tolist()
    return child


def forget_point(x, node: Node, max_leaf_samples: int) -> None:
    """Walk ``x`` down the *current* structure, draining counts.

    Supports are never shrunk on the way down; only a merge recomputes one.
    When an internal node's height drops below its own split threshold the
    subtree below it has lost its statistical basis, so its children are
    folded back in and the descent stops there.
    """
    while True:
        node.height -= 1
        q = node.split_dim
        if q is None:
            return
        if node.height < (max_leaf_samples << node.depth):
            merge_children(node)
            return
        node = node.left if x[q] < node.split_value else node.right


def merge_children(node: Node) -> None:
    """Fold both children back into ``node``, which becomes a leaf again.

    The node's support is replaced by the minimal box enclosing the children's
    supports; this may be tighter than the old support when forgotten points
    had stretched it. A child without support contributes nothing, and if
    neither child has one the merged node has none either. Height is left
    untouched: the children's mass is already counted in it.
    """
    left = node.left
    right = node.right
    if left.lower is None:
        node.lower = right.lower
        node.upper = right.upper
    elif right.lower is None:
        node.lower = left.lower
        node.upper = left.upper
    else:
        node.lower = [a if a < b else b for a, b in zip(left.lower, right.lower)]
        node.upper = [a if a > b else b for a, b in zip(left.upper, right.upper)]
    node.split_dim = None
    node.split_value = None
    node.left = None
    node.right = None


def point_depth(x, node: Node, max_leaf_samples: int) -> float:
    """Depth at which ``x`` lands, plus a credit for unexpanded dense leaves.

    A leaf holding more than ``max_leaf_samples`` points would keep splitting
    if it were allowed to, so the expected extra depth ``log2(h / cap)`` is
    added. The credit is clamped at zero: sparse or drained leaves (including
    ones with non-positive height) estimate no further splits, which keeps
    scores bounded by 1. Read-only.
    """
    while True:
        q = node.split_dim
        if q is None:
            h = node.height
            if h <= max_leaf_samples:
                return float(node.depth)
            return node.depth + math.log2(h / max_leaf_samples)
        node = node.left if x[q] < node.split_value else node.right


def score_from_depth(mean_depth: float, normalizer: float) -> float:
    """Map an ensemble-mean isolation depth to an anomaly score in [0, 1]."""
    if mean_depth <= 0.0:
        # Also covers the degenerate window_size == max_leaf_samples config,
        # where the normalizer is 0 but no positive depth is reachable.
        return 1.0
    return 2.0 ** (-mean_depth / normalizer)


class OnlineITree:
    """A single histogram tree: a root node plus a dedicated random stream."""

    __slots__ = ("root", "rng")

    def __init__(self, rng) -> None:
        self.root = Node(0)
        self.rng = rng


@dataclass(frozen=True)
class ForestStats:
    """Read-only structural summary, one entry per tree."""

    node_counts: tuple[int, ...]
    max_depths: tuple[int, ...]
    mean_leaf_depths: tuple[float, ...]
    buffer_size: int


def _update_tree_and_depth(tree, point, expired, max_leaf_samples, depth_limit) -> float:
    # Per-tree step of the streaming update; trees share no state, so running
    # these in any order or in parallel yields identical results.
    root = tree.root
    learn_point(point, root, max_leaf_samples, depth_limit, tree.rng)
    if expired is not None:
        forget_point(expired, root, max_leaf_samples)
    return point_depth(point, root, max_leaf_samples)


class OnlineIForest:
    """Ensemble of online trees over a shared sliding buffer of recent points.

    The forest is externally synchronized: at most one ``process_point`` /
    ``process_batch`` call may be in flight at a time. With ``workers > 1``
    the per-tree fan-out runs on a thread pool; scores are bit-identical to
    the sequential ones because each tree owns its random stream and depth
    contributions are reduced in tree order.

    Attributes:
        config: The immutable run parameters.
        trees: The ensemble, each tree seeded independently from
            ``(master_seed, tree_index)`` via ``numpy.random.SeedSequence``.
        buffer: FIFO of the most recent points (at most ``window_size``).
        samples_seen: Number of points processed so far.
    """

    def __init__(self, config: ForestConfig, workers: int = 1) -> None:
        if workers < 1:
            raise ValueError(f"workers must be positive, got {workers}")
        self.config = config
        root_seq = np.random.SeedSequence(config.master_seed & _SEED_MASK)
        self.trees = [
            OnlineITree(np.random.default_rng(child))
            for child in root_seq.spawn(config.num_trees)
        ]
        self.buffer: deque[tuple[float, ...]] = deque()
        self.samples_seen = 0
        self._dim: int | None = None
        self._executor = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None

    # -- streaming -----------------------------------------------------------

    def process_point(self, x: Sequence[float]) -> float:
        """Learn ``x``, forget the expired point if the buffer is full, score ``x``.

        The score is computed after the update, so a point influences its own
        score. Raises ValueError on dimension mismatch or non-finite
        coordinates, in which case the forest is left untouched.
        """
        return self._ingest(self._checked_point(x))

    def process_batch(self, batch) -> np.ndarray:
        """Process a 2-D array of points one by one; returns their scores.

        Batching is a driver convenience only: the scores are identical to
        calling :meth:`process_point` per row. The whole batch is validated
        up front so a bad row rejects the batch with the state unchanged.
        """
        arr = np.asarray(batch, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError(f"expected a 2-D batch, got shape {arr.shape}")
        if self._dim is not None and arr.shape[1] != self._dim:
            raise ValueError(
                f"dimension mismatch: batch has {arr.shape[1]} columns, stream has {self._dim}"
            )
        if arr.shape[1] < 1:
            raise ValueError("points must have at least one coordinate")
        if arr.size and not np.isfinite(arr).all():
            row, col = np.argwhere(~np.isfinite(arr))[0]
            raise ValueError(f"non-finite coordinate at batch row {row}, column {col}")
        scores = np.empty(arr.shape[0], dtype=np.float64)
        for i, row in enumerate(arr.tolist()):
            scores[i] = self._ingest(tuple(row))
        return scores

    def score_point(self, x: Sequence[float]) -> float:
        """Score ``x`` against the current trees without learning it.

        Read-only; safe to call concurrently with other read-only queries on
        a quiescent forest.
        """
        point = self._checked_point(x)
        cap = self.config.max_leaf_samples
        depths = [point_depth(point, tree.root, cap) for tree in self.trees]
        return score_from_depth(sum(depths) / len(depths), self.config.normalizer)

    def snapshot_stats(self) -> ForestStats:
        """Structural summary of every tree plus the current buffer length."""
        counts = []
        max_depths = []
        mean_leaf_depths = []
        for tree in self.trees:
            nodes = 0
            deepest = 0
            leaves = 0
            leaf_depth_sum = 0
            stack = [tree.root]
            while stack:
                node = stack.pop()
                nodes += 1
                if node.depth > deepest:
                    deepest = node.depth
                if node.split_dim is None:
                    leaves += 1
                    leaf_depth_sum += node.depth
                else:
                    stack.append(node.left)
                    stack.append(node.right)
            counts.append(nodes)
            max_depths.append(deepest)
            mean_leaf_depths.append(leaf_depth_sum / leaves)
        return ForestStats(
            node_counts=tuple(counts),
            max_depths=tuple(max_depths),
            mean_leaf_depths=tuple(mean_leaf_depths),
            buffer_size=len(self.buffer),
        )

    # -- lifecycle -----------------------------------------------------------

    def close(self) -> None:
        """Release the worker pool, if any. The forest stays usable serially."""
        if self._executor is not None:
            self._executor.shutdown(wait=True)
            self._executor = None

    def __enter__(self) -> "OnlineIForest":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()

    # -- internals -----------------------------------------------------------

    def _checked_point(self, x) -> tuple[float, ...]:
        point = tuple(float(v) for v in x)
        if self._dim is None:
            if not point:
                raise ValueError("points must have at least one coordinate")
        elif len(point) != self._dim:
            raise ValueError(
                f"dimension mismatch: point has {len(point)} coordinates, stream has {self._dim}"
            )
        for v in point:
            if not math.isfinite(v):
                raise ValueError(f"non-finite coordinate {v!r} in point {point!r}")
        return point

    def _ingest(self, point: tuple[float, ...]) -> float:
        if self._dim is None:
            self._dim = len(point)
        config = self.config
        buffer = self.buffer
        buffer.append(point)
        expired = buffer.popleft() if len(buffer) > config.window_size else None
        cap = config.max_leaf_samples
        limit = config.depth_limit
        trees = self.trees
        if self._executor is None:
            depths = [
                _update_tree_and_depth(tree, point, expired, cap, limit) for tree in trees
            ]
        else:
            depths = list(
                self._executor.map(
                    lambda tree: _update_tree_and_depth(tree, point, expired, cap, limit),
                    trees,
                )
            )
        self.samples_seen += 1
        return score_from_depth(sum(depths) / len(depths), config.normalizer)
