"""Datasets, metrics and flat clustering results shared by every algorithm."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np


class Metric(str, Enum):
    """Point dissimilarities available to the clustering stack.

    ``SQUARED_EUCLIDEAN`` violates the triangle inequality. Anything that
    prunes with bounds (the accelerated k-means variants) works on
    ``EUCLIDEAN`` and squares only when reporting SSE.
    """

    EUCLIDEAN = "euclidean"
    SQUARED_EUCLIDEAN = "squared_euclidean"
    MANHATTAN = "manhattan"

    @classmethod
    def parse(cls, value: "Metric | str") -> "Metric":
        if isinstance(value, Metric):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            valid = ", ".join(m.value for m in cls)
            raise ValueError(f"unknown metric {value!r} (valid: {valid})") from None

    @property
    def is_metric(self) -> bool:
        return self is not Metric.SQUARED_EUCLIDEAN


def distance(x, y, metric: Metric | str = Metric.EUCLIDEAN) -> float:
    """Dissimilarity of two vectors of equal length."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
    return float(pairwise_rows(x[None, :], y[None, :], metric)[0])


def pairwise_rows(a: np.ndarray, b: np.ndarray, metric: Metric | str = Metric.EUCLIDEAN) -> np.ndarray:
    """Row-wise dissimilarities ``d(a[i], b[i])``; ``b`` may broadcast."""
    metric = Metric.parse(metric)
    diff = a - b
    if metric is Metric.MANHATTAN:
        return np.abs(diff).sum(axis=-1)
    sq = (diff * diff).sum(axis=-1)
    if metric is Metric.SQUARED_EUCLIDEAN:
        return sq
    return np.sqrt(sq)


@dataclass(frozen=True, eq=False)
class Dataset:
    """Dense ``n x d`` matrix of finite reals with optional row labels."""

    points: np.ndarray
    labels: Optional[tuple] = None

    def __post_init__(self):
        pts = np.array(self.points, dtype=float, copy=True)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise ValueError(f"dataset needs n >= 1 rows and d >= 1 columns, got shape {pts.shape}")
        if not np.isfinite(pts).all():
            raise ValueError("dataset contains NaN or infinite values")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if self.labels is not None:
            labels = tuple(self.labels)
            if len(labels) != pts.shape[0]:
                raise ValueError(f"{len(labels)} labels for {pts.shape[0]} rows")
            object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self):
        return self.n


def as_points(data) -> np.ndarray:
    if isinstance(data, Dataset):
        return data.points
    return Dataset(data).points


@dataclass(eq=False)
class Clustering:
    """Flat clustering: one label per point, ``-1`` for noise.

    Labels of non-noise points are dense in ``[0, num_clusters)``.
    ``prototypes`` holds mean vectors or medoid indices, one per cluster,
    when the producing algorithm has them.
    """

    assignment: np.ndarray
    num_clusters: int
    prototypes: Optional[np.ndarray] = None
    stats: dict = field(default_factory=dict)

    def __post_init__(self):
        a = np.asarray(self.assignment, dtype=np.int64)
        if a.ndim != 1:
            raise ValueError("assignment must be one-dimensional")
        self.assignment = a
        c = int(self.num_clusters)
        if np.any(a < -1) or np.any(a >= c):
            raise ValueError(f"labels outside [-1, {c})")
        present = np.unique(a[a >= 0])
        if len(present) != c:
            raise ValueError(f"labels are not dense: expected {c} clusters, found {len(present)}")
        self.num_clusters = c

    @classmethod
    def from_labels(cls, labels: Sequence[int], **kwargs) -> "Clustering":
        """Relabel densely in order of first appearance; negatives become noise."""
        labels = np.asarray(labels, dtype=np.int64)
        out = np.full(len(labels), -1, dtype=np.int64)
        mapping: dict[int, int] = {}
        for i, lab in enumerate(labels):
            if lab < 0:
                continue
            out[i] = mapping.setdefault(int(lab), len(mapping))
        return cls(out, len(mapping), **kwargs)

    @property
    def n(self) -> int:
        return len(self.assignment)

    def sizes(self) -> np.ndarray:
        return np.bincount(self.assignment[self.assignment >= 0], minlength=self.num_clusters)

    def members(self, label: int) -> np.ndarray:
        return np.flatnonzero(self.assignment == label)
