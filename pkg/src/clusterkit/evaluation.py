"""Internal cluster validation indices.

Noise points (label ``-1``) are left out of every index. Centroids are
always recomputed from the data, never taken from the clustering.
"""
from __future__ import annotations

import numpy as np

from .core import Clustering, Metric, as_points
from .hac import CondensedDistanceMatrix, condensed_matrix


def _labels(c) -> np.ndarray:
    return np.asarray(c.assignment if isinstance(c, Clustering) else c, dtype=np.int64)


def _clean(data, c):
    """Non-noise points, their dense labels, and the cluster count."""
    x = as_points(data)
    labels = _labels(c)
    if len(labels) != len(x):
        raise ValueError(f"clustering has {len(labels)} labels for {len(x)} points")
    keep = labels >= 0
    if not keep.any():
        raise ValueError("every point is noise")
    _, dense = np.unique(labels[keep], return_inverse=True)
    return x[keep], dense, int(dense.max()) + 1


def _centroids(x, labels, k):
    counts = np.bincount(labels, minlength=k)
    sums = np.zeros((k, x.shape[1]))
    np.add.at(sums, labels, x)
    return sums / counts[:, None], counts


def _need_two(k):
    if k < 2:
        raise ValueError(f"at least 2 clusters are required, got {k}")


def sse(data, c) -> float:
    """Sum of squared distances to the cluster centroids."""
    x, labels, k = _clean(data, c)
    mu, _ = _centroids(x, labels, k)
    diff = x - mu[labels]
    return float((diff * diff).sum())


def silhouette(m, c) -> tuple[float, np.ndarray]:
    """Mean silhouette and per-point values (``nan`` for noise).

    Members of singleton clusters score 0.
    """
    d = m.to_square() if isinstance(m, CondensedDistanceMatrix) else np.asarray(m, dtype=float)
    labels = _labels(c)
    if d.shape != (len(labels), len(labels)):
        raise ValueError("distance matrix does not match the clustering")
    keep = np.flatnonzero(labels >= 0)
    _, dense = np.unique(labels[keep], return_inverse=True)
    k = int(dense.max()) + 1 if len(keep) else 0
    _need_two(k)
    sub = d[np.ix_(keep, keep)]
    counts = np.bincount(dense, minlength=k)
    # per point: total distance to each cluster
    totals = np.zeros((len(keep), k))
    for j in range(k):
        totals[:, j] = sub[:, dense == j].sum(axis=1)
    own = counts[dense]
    ar = np.arange(len(keep))
    with np.errstate(invalid="ignore", divide="ignore"):
        a = totals[ar, dense] / (own - 1)
        means = totals / counts[None, :]
    means[ar, dense] = np.inf
    b = means.min(axis=1)
    top = np.maximum(a, b)
    s = np.where((own > 1) & (top > 0), (b - a) / np.where(top > 0, top, 1.0), 0.0)
    per_point = np.full(len(labels), np.nan)
    per_point[keep] = s
    return float(s.mean()), per_point


def simplified_silhouette(data, c) -> float:
    """Silhouette with distances to centroids instead of mean distances.

    A point sitting on its own centroid scores 1 when the nearest other
    centroid is farther away, and 0 when it coincides.
    """
    x, labels, k = _clean(data, c)
    _need_two(k)
    mu, _ = _centroids(x, labels, k)
    dist = np.sqrt(((x[:, None, :] - mu[None, :, :]) ** 2).sum(axis=2))
    ar = np.arange(len(x))
    a = dist[ar, labels].copy()
    dist[ar, labels] = np.inf
    b = dist.min(axis=1)
    top = np.maximum(a, b)
    s = np.where(top > 0, (b - a) / np.where(top > 0, top, 1.0), 0.0)
    return float(s.mean())


def davies_bouldin(data, c) -> float:
    """Mean over clusters of the worst ``(S_i + S_j) / M_ij`` ratio."""
    x, labels, k = _clean(data, c)
    _need_two(k)
    mu, counts = _centroids(x, labels, k)
    spread = np.bincount(labels, weights=np.sqrt(((x - mu[labels]) ** 2).sum(axis=1)), minlength=k) / counts
    sep = np.sqrt(((mu[:, None, :] - mu[None, :, :]) ** 2).sum(axis=2))
    off = ~np.eye(k, dtype=bool)
    if np.any(sep[off] == 0):
        i, j = np.argwhere((sep == 0) & off)[0]
        raise ValueError(f"clusters {i} and {j} have coincident centroids")
    ratio = (spread[:, None] + spread[None, :]) / np.where(off, sep, 1.0)
    ratio[~off] = -np.inf
    return float(ratio.max(axis=1).mean())


def variance_ratio(data, c) -> float:
    """Calinski-Harabasz: between- over within-cluster scatter, degree-normalized."""
    x, labels, k = _clean(data, c)
    n = len(x)
    if not 2 <= k <= n - 1:
        raise ValueError(f"variance ratio needs 2 <= k <= n - 1, got k={k}, n={n}")
    mu, counts = _centroids(x, labels, k)
    overall = x.mean(axis=0)
    between = float((counts * ((mu - overall) ** 2).sum(axis=1)).sum())
    within = float(((x - mu[labels]) ** 2).sum())
    if within == 0:
        raise ValueError("within-cluster scatter is zero; the ratio is unbounded")
    return (between / (k - 1)) / (within / (n - k))


NAMES = ("sse", "silhouette", "simplified_silhouette", "davies_bouldin", "variance_ratio")


def evaluate(name: str, data, c, metric: Metric | str = Metric.EUCLIDEAN) -> float:
    """One index by name; ``metric`` only affects the silhouette."""
    if name == "silhouette":
        return silhouette(condensed_matrix(data, metric), c)[0]
    by_name = {"sse": sse, "simplified_silhouette": simplified_silhouette,
               "davies_bouldin": davies_bouldin, "variance_ratio": variance_ratio}
    if name not in by_name:
        raise ValueError(f"unknown index {name!r} (valid: {', '.join(NAMES)})")
    return by_name[name](data, c)
