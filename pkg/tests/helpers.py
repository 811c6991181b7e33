"""Shared test scaffolding: invariant checks, RNG recording, stream makers."""

from __future__ import annotations

import csv
import math

import numpy as np


def write_labeled_csv(path, points, labels):
    """Write a feature matrix plus binary labels as a headered CSV file."""
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow([f"f{i}" for i in range(points.shape[1])] + ["label"])
        for row, label in zip(points.tolist(), labels.tolist()):
            writer.writerow(row + [label])


def check_forest_invariants(forest, score=None):
    """Assert every structural invariant of a forest, walking all trees."""
    config = forest.config
    depth_cap = math.ceil(config.depth_limit)
    worst_depth = math.floor(
        math.log2((config.window_size + 1) / config.max_leaf_samples) + 1
    )
    node_cap = 2 ** (worst_depth + 1) - 1
    if score is not None:
        assert 0.0 <= score <= 1.0
    assert len(forest.buffer) == min(forest.samples_seen, config.window_size)
    for tree in forest.trees:
        assert tree.root.depth == 0
        assert tree.root.height == len(forest.buffer)
        assert _check_subtree(tree.root, depth_cap) <= node_cap


def _check_subtree(node, depth_cap):
    assert node.depth <= depth_cap
    if node.split_dim is None:
        assert node.left is None and node.right is None
        assert node.split_value is None
        return 1
    left, right = node.left, node.right
    assert left.depth == node.depth + 1
    assert right.depth == node.depth + 1
    assert node.height == left.height + right.height
    assert node.lower is not None  # an internal node has split, hence was touched
    for child in (left, right):
        if child.lower is not None:
            assert all(p <= c for p, c in zip(node.lower, child.lower))
            assert all(p >= c for p, c in zip(node.upper, child.upper))
    return 1 + _check_subtree(left, depth_cap) + _check_subtree(right, depth_cap)


def canonical_tree(node):
    """Canonical nested-tuple form of a production tree, for exact comparison."""
    support = None if node.lower is None else (tuple(node.lower), tuple(node.upper))
    if node.split_dim is None:
        return (node.depth, node.height, support, None)
    return (
        node.depth,
        node.height,
        support,
        (
            node.split_dim,
            node.split_value,
            canonical_tree(node.left),
            canonical_tree(node.right),
        ),
    )


def canonical_forest_state(forest):
    return (
        tuple(canonical_tree(tree.root) for tree in forest.trees),
        tuple(forest.buffer),
    )


class RecordingRng:
    """Duck-typed stand-in for a numpy Generator that logs every forwarded draw.

    Integer draws are logged as ints, scalar uniforms as floats, and array
    uniforms as lists of row tuples, in call order.
    """

    def __init__(self, inner, log):
        self._inner = inner
        self.log = log

    def integers(self, *args, **kwargs):
        value = int(self._inner.integers(*args, **kwargs))
        self.log.append(value)
        return value

    def uniform(self, *args, **kwargs):
        value = self._inner.uniform(*args, **kwargs)
        if isinstance(value, np.ndarray):
            self.log.append([tuple(row) for row in value.tolist()])
            return value
        value = float(value)
        self.log.append(value)
        return value


def gaussian_uniform_mixture(rng, n, dim, noise_fraction=0.2):
    """n points from a few Gaussian blobs plus a uniform noise floor."""
    num_centers = int(rng.integers(1, 4))
    centers = rng.uniform(-5.0, 5.0, size=(num_centers, dim))
    component = rng.integers(0, num_centers, size=n)
    points = centers[component] + rng.normal(0.0, 0.5, size=(n, dim))
    noise = rng.random(n) < noise_fraction
    points[noise] = rng.uniform(-8.0, 8.0, size=(int(noise.sum()), dim))
    return points


def labeled_cluster_stream(rng, n, dim=2, anomaly_rate=0.05, center=(0.0, 0.0), spread=8.0):
    """Dense genuine blob at ``center`` with sparse uniform anomalies around it."""
    center = np.asarray(center, dtype=float)
    labels = (rng.random(n) < anomaly_rate).astype(np.int64)
    points = center + rng.normal(0.0, 0.8, size=(n, dim))
    anomalous = labels == 1
    points[anomalous] = center + rng.uniform(-spread, spread, size=(int(anomalous.sum()), dim))
    return points, labels
