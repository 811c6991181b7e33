"""Straight-line re-simulation of the streaming tree maintenance rules.

This is the independent oracle for the incremental implementation: recursive,
literal, and slow, over plain dict nodes. All random draws (split dimension,
split value, initialization sample) are consumed from pre-recorded per-tree
queues instead of an RNG, so a run can be replayed against any recording.

Deliberately imports nothing from the package under test.
"""

from __future__ import annotations

import math


def new_node(depth):
    return {"height": 0, "lower": None, "upper": None, "depth": depth, "split": None}


def _make_child(rows, depth):
    child = new_node(depth)
    child["height"] = len(rows)
    if rows:
        child["lower"] = [min(column) for column in zip(*rows)]
        child["upper"] = [max(column) for column in zip(*rows)]
    return child


def learn(point, node, max_leaf_samples, depth_limit, draws):
    node["height"] += 1
    if node["lower"] is None:
        node["lower"] = list(point)
        node["upper"] = list(point)
    else:
        node["lower"] = [min(lo, v) for lo, v in zip(node["lower"], point)]
        node["upper"] = [max(hi, v) for hi, v in zip(node["upper"], point)]
    if node["split"] is None:
        threshold = max_leaf_samples * 2 ** node["depth"]
        if node["height"] >= threshold and node["depth"] < depth_limit:
            split_dim = draws.popleft()
            split_value = draws.popleft()
            sample = draws.popleft()
            left_rows = [row for row in sample if row[split_dim] < split_value]
            right_rows = [row for row in sample if not (row[split_dim] < split_value)]
            node["split"] = [
                split_dim,
                split_value,
                _make_child(left_rows, node["depth"] + 1),
                _make_child(right_rows, node["depth"] + 1),
            ]
        return
    split_dim, split_value, left, right = node["split"]
    branch = left if point[split_dim] < split_value else right
    learn(point, branch, max_leaf_samples, depth_limit, draws)


def forget(point, node, max_leaf_samples):
    node["height"] -= 1
    if node["split"] is None:
        return
    split_dim, split_value, left, right = node["split"]
    if node["height"] < max_leaf_samples * 2 ** node["depth"]:
        if left["lower"] is None:
            node["lower"], node["upper"] = right["lower"], right["upper"]
        elif right["lower"] is None:
            node["lower"], node["upper"] = left["lower"], left["upper"]
        else:
            node["lower"] = [min(a, b) for a, b in zip(left["lower"], right["lower"])]
            node["upper"] = [max(a, b) for a, b in zip(left["upper"], right["upper"])]
        node["split"] = None
        return
    branch = left if point[split_dim] < split_value else right
    forget(point, branch, max_leaf_samples)


def canonical(node):
    support = None if node["lower"] is None else (tuple(node["lower"]), tuple(node["upper"]))
    if node["split"] is None:
        return (node["depth"], node["height"], support, None)
    split_dim, split_value, left, right = node["split"]
    return (
        node["depth"],
        node["height"],
        support,
        (split_dim, split_value, canonical(left), canonical(right)),
    )


def simulate(points, num_trees, window_size, max_leaf_samples, draw_queues):
    """Replay the stream; yield the canonical (trees, window) state per step."""
    depth_limit = math.log2(window_size / max_leaf_samples)
    trees = [new_node(0) for _ in range(num_trees)]
    window = []
    for point in points:
        point = tuple(point)
        window.append(point)
        for tree, draws in zip(trees, draw_queues):
            learn(point, tree, max_leaf_samples, depth_limit, draws)
        if len(window) > window_size:
            oldest = window.pop(0)
            for tree in trees:
                forget(oldest, tree, max_leaf_samples)
        yield (tuple(canonical(tree) for tree in trees), tuple(window))
