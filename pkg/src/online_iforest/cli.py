"""Command-line driver: replay labeled CSV streams through the forest.

Subcommands:
    score  - emit one (index, score, label) row per input point, arrival order
    bench  - shuffled end-to-end runs; JSON lines with ROC AUC and timing
    grid   - export anomaly scores on a lattice over a 2-D stream's bounding box

Machine-readable output goes to stdout (bench) or to --out files (score,
grid); diagnostics go to stderr. Exit code is 0 only when all outputs were
written.
"""

from __future__ import annotations

import argparse
import csv
import json
import statistics
import sys
import time
from pathlib import Path

import numpy as np

from .forest import ForestConfig, OnlineIForest
from .ingest import batches, load_csv, shuffle
from .metrics import ScoreRecord, roc_auc

__all__ = ["entrypoint", "main"]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="online-iforest",
        description="Streaming anomaly detection benchmark driver.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("input", type=Path, help="labeled CSV file (header required)")
    common.add_argument("--trees", type=int, default=32, help="ensemble size (default 32)")
    common.add_argument(
        "--window", type=int, default=2048, help="sliding buffer capacity (default 2048)"
    )
    common.add_argument(
        "--max-leaf-samples",
        type=int,
        default=32,
        help="occupancy that splits a depth-0 leaf (default 32)",
    )
    common.add_argument(
        "--batch", type=int, default=100, help="driver chunk size (default 100)"
    )
    common.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    common.add_argument(
        "--label-column",
        default="label",
        help="header name or position of the label column (default 'label')",
    )
    common.add_argument(
        "--anomaly-value",
        default="1",
        help="label cell value that marks an anomaly (default '1')",
    )
    common.add_argument(
        "--workers",
        type=int,
        default=1,
        help="threads for the per-tree fan-out; scores are identical at any value",
    )

    sub = parser.add_subparsers(dest="command", required=True)

    p_score = sub.add_parser(
        "score", parents=[common], help="score every point in arrival order"
    )
    p_score.add_argument("--out", type=Path, required=True, help="output CSV path")

    p_bench = sub.add_parser(
        "bench", parents=[common], help="shuffled benchmark runs with AUC and timing"
    )
    p_bench.add_argument(
        "--runs", type=int, default=1, help="number of shuffled runs (default 1)"
    )

    p_grid = sub.add_parser(
        "grid", parents=[common], help="export a score lattice for a 2-D stream"
    )
    p_grid.add_argument(
        "--resolution", type=int, default=32, help="lattice points per axis (default 32)"
    )
    p_grid.add_argument("--out", type=Path, required=True, help="output CSV path")
    return parser


def _config(args: argparse.Namespace, seed: int) -> ForestConfig:
    return ForestConfig(
        num_trees=args.trees,
        window_size=args.window,
        max_leaf_samples=args.max_leaf_samples,
        master_seed=seed,
    )


def _run_stream(forest: OnlineIForest, stream, batch_size: int) -> np.ndarray:
    scores = np.empty(len(stream), dtype=np.float64)
    cursor = 0
    for chunk in batches(stream, batch_size):
        scores[cursor : cursor + len(chunk)] = forest.process_batch(chunk)
        cursor += len(chunk)
    return scores


def cmd_score(args: argparse.Namespace) -> int:
    stream = load_csv(args.input, args.label_column, args.anomaly_value)
    with OnlineIForest(_config(args, args.seed), workers=args.workers) as forest:
        scores = _run_stream(forest, stream, args.batch)
    with args.out.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["index", "score", "label"])
        for i, (score, label) in enumerate(zip(scores.tolist(), stream.labels.tolist())):
            writer.writerow([i, score, label])
    print(f"wrote {len(stream)} scores to {args.out}", file=sys.stderr)
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    if args.runs < 1:
        raise ValueError(f"--runs must be positive, got {args.runs}")
    stream = load_csv(args.input, args.label_column, args.anomaly_value)
    aucs = []
    times = []
    for run in range(args.runs):
        seed = args.seed + run
        shuffled = shuffle(stream, seed)
        with OnlineIForest(_config(args, seed), workers=args.workers) as forest:
            started = time.perf_counter()
            scores = _run_stream(forest, shuffled, args.batch)
            elapsed = time.perf_counter() - started
        records = [
            ScoreRecord(index=i, score=s, label=lbl)
            for i, (s, lbl) in enumerate(zip(scores.tolist(), shuffled.labels.tolist()))
        ]
        auc = roc_auc(records)
        aucs.append(auc)
        times.append(elapsed)
        print(json.dumps(_bench_payload(args, stream, seed=seed, auc=auc, elapsed=elapsed)))
    summary = _bench_payload(
        args,
        stream,
        seed=None,
        auc=statistics.median(aucs),
        elapsed=statistics.median(times),
    )
    summary["summary"] = "median"
    summary["runs"] = args.runs
    print(json.dumps(summary))
    return 0


def _bench_payload(args, stream, *, seed, auc, elapsed) -> dict:
    return {
        "dataset": stream.name,
        "seed": seed,
        "auc": auc,
        "elapsed_seconds": elapsed,
        "n": len(stream),
        "d": stream.dimension,
        "trees": args.trees,
        "window": args.window,
        "max_leaf_samples": args.max_leaf_samples,
    }


def cmd_grid(args: argparse.Namespace) -> int:
    if args.resolution < 1:
        raise ValueError(f"--resolution must be positive, got {args.resolution}")
    stream = load_csv(args.input, args.label_column, args.anomaly_value)
    if stream.dimension != 2:
        raise ValueError(
            f"grid export requires a 2-D stream, {args.input} has d={stream.dimension}"
        )
    with OnlineIForest(_config(args, args.seed), workers=args.workers) as forest:
        _run_stream(forest, stream, args.batch)
        mins = stream.points.min(axis=0)
        maxs = stream.points.max(axis=0)
        xs = np.linspace(mins[0], maxs[0], args.resolution)
        ys = np.linspace(mins[1], maxs[1], args.resolution)
        with args.out.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(["x", "y", "score"])
            for x in xs.tolist():
                for y in ys.tolist():
                    writer.writerow([x, y, forest.score_point((x, y))])
    print(
        f"wrote {args.resolution * args.resolution} grid scores to {args.out}",
        file=sys.stderr,
    )
    return 0


_COMMANDS = {"score": cmd_score, "bench": cmd_bench, "grid": cmd_grid}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:  # console-script shim
    raise SystemExit(main())
