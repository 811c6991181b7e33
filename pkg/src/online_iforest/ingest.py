"""Labeled CSV datasets as single-pass streams.

Input files are RFC-4180-style CSV with a mandatory header row, UTF-8 text
and '.' as the decimal separator. Every non-label column must parse as a
finite float; no scaling or normalization is applied, since the detector's
supports adapt to raw coordinates and silent rescaling would change results.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Union

import numpy as np

__all__ = ["LabeledStream", "batches", "load_csv", "shuffle"]


@dataclass(frozen=True)
class LabeledStream:
    """An in-memory labeled dataset replayed in row order.

    Attributes:
        name: Dataset identifier (defaults to the file stem).
        points: Feature matrix, shape (n, d), float64.
        labels: Per-row labels, 1 = anomaly, 0 = genuine.
    """

    name: str
    points: np.ndarray
    labels: np.ndarray

    def __post_init__(self) -> None:
        if self.points.ndim != 2:
            raise ValueError(f"points must be 2-D, got shape {self.points.shape}")
        if self.labels.shape != (self.points.shape[0],):
            raise ValueError("labels must align with points, one per row")

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def dimension(self) -> int:
        return self.points.shape[1]

    @property
    def anomaly_count(self) -> int:
        return int(self.labels.sum())


def load_csv(
    path: Union[str, Path],
    label_column: Union[str, int] = "label",
    anomaly_value: str = "1",
) -> LabeledStream:
    """Parse a labeled CSV file into a stream.

    ``label_column`` is resolved first as a header name, then as a (possibly
    negative) column position. A row's label is 1 when its label cell equals
    ``anomaly_value`` after stripping surrounding whitespace, 0 otherwise.
    Malformed input raises ValueError naming the offending row (1-based,
    header = row 1) and column.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None:
            raise ValueError(f"{path}: empty file, expected a header row")
        label_idx = _resolve_label_column(header, label_column, path)
        feature_names = [name for i, name in enumerate(header) if i != label_idx]
        if not feature_names:
            raise ValueError(f"{path}: no feature columns besides the label")

        rows: list[list[float]] = []
        labels: list[int] = []
        anomaly_value = anomaly_value.strip()
        for row_num, row in enumerate(reader, start=2):
            if not row:
                continue  # tolerate blank lines
            if len(row) != len(header):
                raise ValueError(
                    f"{path}: row {row_num} has {len(row)} cells, header has {len(header)}"
                )
            labels.append(1 if row[label_idx].strip() == anomaly_value else 0)
            features = []
            for i, cell in enumerate(row):
                if i == label_idx:
                    continue
                name = header[i]
                try:
                    value = float(cell)
                except ValueError:
                    raise ValueError(
                        f"{path}: row {row_num}, column {name!r}: "
                        f"cannot parse {cell!r} as a number"
                    ) from None
                if not np.isfinite(value):
                    raise ValueError(
                        f"{path}: row {row_num}, column {name!r}: "
                        f"non-finite value {cell!r}"
                    )
                features.append(value)
            rows.append(features)
        if not rows:
            raise ValueError(f"{path}: no data rows after the header")

    return LabeledStream(
        name=path.stem,
        points=np.asarray(rows, dtype=np.float64),
        labels=np.asarray(labels, dtype=np.int64),
    )


def _resolve_label_column(header: list[str], label_column, path: Path) -> int:
    if isinstance(label_column, str):
        if label_column in header:
            return header.index(label_column)
        try:
            position = int(label_column)
        except ValueError:
            raise ValueError(
                f"{path}: label column {label_column!r} not found in header {header}"
            ) from None
    else:
        position = int(label_column)
    if not -len(header) <= position < len(header):
        raise ValueError(
            f"{path}: label column index {position} out of range for {len(header)} columns"
        )
    return position % len(header)


def shuffle(stream: LabeledStream, seed: int) -> LabeledStream:
    """Deterministic seeded permutation of the stream rows."""
    permutation = np.random.default_rng(seed).permutation(len(stream))
    return LabeledStream(
        name=stream.name,
        points=stream.points[permutation],
        labels=stream.labels[permutation],
    )


def batches(stream: LabeledStream, batch_size: int) -> Iterator[np.ndarray]:
    """Yield the stream's points in consecutive chunks, the last possibly short.

    Purely a driver convenience: the detector updates per point, so batch
    size never affects scores.
    """
    if batch_size < 1:
        raise ValueError(f"batch_size must be positive, got {batch_size}")
    points = stream.points
    for start in range(0, len(stream), batch_size):
        yield points[start : start + batch_size]
