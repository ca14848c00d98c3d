"""Point clouds, CSV ingestion and Euclidean distance matrices."""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from topogen.errors import InputError


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class PointCloud:
    """``n`` points in ``R^d`` stored as a read-only float64 matrix.

    ``labels`` carries the optional label column of the source file; it is
    metadata only and never enters distance computations.
    """

    points: np.ndarray
    columns: Optional[tuple[str, ...]] = None
    labels: Optional[np.ndarray] = field(default=None, compare=False)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2:
            raise InputError(f"points must be a 2-D array, got shape {pts.shape}")
        n, d = pts.shape
        if n < 1 or d < 1:
            raise InputError(f"point cloud needs n >= 1 and d >= 1, got {n}x{d}")
        if not np.all(np.isfinite(pts)):
            bad = np.argwhere(~np.isfinite(pts))[0]
            raise InputError(f"non-finite coordinate at row {bad[0]}, column {bad[1]}")
        if self.columns is not None and len(self.columns) != d:
            raise InputError(f"{len(self.columns)} column names for {d} columns")
        object.__setattr__(self, "points", _frozen(pts))
        if self.columns is not None:
            object.__setattr__(self, "columns", tuple(self.columns))

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.n

    def subset(self, rows: Sequence[int]) -> "PointCloud":
        rows = np.asarray(rows, dtype=np.intp)
        labels = None if self.labels is None else self.labels[rows]
        return PointCloud(self.points[rows], self.columns, labels)

    def to_csv(self, path: Union[str, os.PathLike]) -> None:
        """Write the cloud in the same schema ``load_csv`` reads.

        Floats are printed with ``repr`` (shortest round-trip), so reloading
        gives back bit-identical coordinates.
        """
        header = self.columns or tuple(f"x{i}" for i in range(self.d))
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in self.points:
                w.writerow([repr(float(v)) for v in row])


@dataclass(frozen=True)
class DistanceMatrix:
    values: np.ndarray
    metric: str = "euclidean"

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise InputError(f"distance matrix must be square, got shape {v.shape}")
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise InputError("distance matrix entries must be finite and nonnegative")
        if np.any(np.diag(v) != 0):
            raise InputError("distance matrix diagonal must be exactly zero")
        if not np.array_equal(v, v.T):
            raise InputError("distance matrix must be symmetric")
        object.__setattr__(self, "values", _frozen(v))

    @property
    def n(self) -> int:
        return self.values.shape[0]


def load_csv(
    path: Union[str, os.PathLike],
    feature_columns: Union[str, Sequence[str]] = "all",
    label_column: Optional[str] = None,
) -> PointCloud:
    """Read a headed, comma-separated numeric file into a ``PointCloud``.

    Args:
        path: CSV file whose first line is a header.
        feature_columns: ``"all"`` for every column except ``label_column``,
            or an explicit list of header names.
        label_column: optional column kept as ``labels`` metadata.

    Raises:
        InputError: missing file, unknown column, ragged row, non-numeric or
            non-finite cell, or an empty selection. Messages name the
            offending row (1-based, header is line 1) and column.
    """
    path = os.fspath(path)
    if not os.path.isfile(path):
        raise InputError(f"data file not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or not rows[0]:
        raise InputError(f"{path}: empty file (no header)")
    header = [h.strip() for h in rows[0]]

    if label_column is not None and label_column not in header:
        raise InputError(f"{path}: label column {label_column!r} not in header")
    if isinstance(feature_columns, str):
        if feature_columns != "all":
            raise InputError(f"feature_columns must be 'all' or a list, got {feature_columns!r}")
        selected = [h for h in header if h != label_column]
    else:
        selected = list(feature_columns)
        missing = [c for c in selected if c not in header]
        if missing:
            raise InputError(f"{path}: columns not in header: {', '.join(missing)}")
    if not selected:
        raise InputError(f"{path}: no feature columns selected")
    idx = [header.index(c) for c in selected]

    body = [(lineno, r) for lineno, r in enumerate(rows[1:], start=2) if r]
    if not body:
        raise InputError(f"{path}: no data rows")
    pts = np.empty((len(body), len(idx)), dtype=np.float64)
    labels = [] if label_column is not None else None
    for i, (lineno, r) in enumerate(body):
        if len(r) != len(header):
            raise InputError(f"{path}: row {lineno} has {len(r)} fields, header has {len(header)}")
        for j, col in enumerate(idx):
            cell = r[col].strip()
            try:
                v = float(cell)
            except ValueError:
                raise InputError(
                    f"{path}: row {lineno}, column {header[col]!r}: not a number: {cell!r}"
                ) from None
            if not np.isfinite(v):
                raise InputError(f"{path}: row {lineno}, column {header[col]!r}: non-finite value")
            pts[i, j] = v
        if labels is not None:
            labels.append(r[header.index(label_column)].strip())
    return PointCloud(pts, tuple(selected), None if labels is None else np.array(labels))


def pairwise_distances(cloud: PointCloud) -> DistanceMatrix:
    x = cloud.points
    diff = x[:, None, :] - x[None, :, :]
    d = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    # exact symmetry; the einsum is symmetric already but make it explicit
    d = np.triu(d, 1)
    d = d + d.T
    return DistanceMatrix(d)


def sample_batch(cloud: PointCloud, m: int, seed) -> PointCloud:
    """Draw ``m`` rows uniformly without replacement.

    ``seed`` may be an int or a ``numpy.random.Generator``.
    """
    if not 1 <= m <= cloud.n:
        raise InputError(f"batch size {m} outside [1, {cloud.n}]")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    rows = rng.choice(cloud.n, size=m, replace=False)
    return cloud.subset(rows)


def standardize(cloud: PointCloud) -> PointCloud:
    """Shift and scale every column to mean 0 and (population) std 1.

    Constant columns map to zeros.
    """
    if cloud.n < 2:
        raise InputError("standardize needs at least 2 points")
    x = cloud.points
    mu = x.mean(axis=0)
    centred = x - mu
    sd = np.sqrt((centred**2).mean(axis=0))
    out = np.zeros_like(x)
    ok = np.ptp(x, axis=0) > 0
    out[:, ok] = centred[:, ok] / sd[ok]
    return PointCloud(out, cloud.columns, cloud.labels)
