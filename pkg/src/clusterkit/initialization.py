"""Initial means and medoids.

Index strategies return ``k`` distinct point indices and can seed both
k-means (the chosen points become the means) and k-medoids. Generated
strategies (``uniform_generated``, ``normal_generated``, ``predefined``)
return vectors and are rejected by medoid algorithms.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import Metric, as_points, pairwise_rows
from .hac import condensed_matrix
from .kmedoids import pam_build
from .rng import Xoroshiro128Plus

KINDS = (
    "first_k",
    "randomly_chosen",
    "uniform_generated",
    "normal_generated",
    "kmeanspp",
    "ostrovsky",
    "pam_build",
    "park",
    "lab",
    "farthest_points",
    "farthest_sum",
    "predefined",
)
VECTOR_KINDS = frozenset({"uniform_generated", "normal_generated", "predefined"})


@dataclass(frozen=True)
class InitStrategy:
    kind: str
    centers: Optional[tuple] = None  # predefined: k rows of d values
    first: Optional[int] = None  # farthest_points / farthest_sum: fixed first point

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown initialization {self.kind!r} (valid: {', '.join(KINDS)})")
        if (self.kind == "predefined") != (self.centers is not None):
            raise ValueError("centers are required for, and only allowed with, predefined")

    @property
    def produces_vectors(self) -> bool:
        return self.kind in VECTOR_KINDS


def strategy(value) -> InitStrategy:
    return value if isinstance(value, InitStrategy) else InitStrategy(str(value))


def _to(x, j, metric):
    return pairwise_rows(x, x[j][None, :], metric)


def _weighted_index(weights: np.ndarray, rng: Xoroshiro128Plus) -> int:
    """Inverse-transform draw; ``-1`` when every weight is zero."""
    cum = np.cumsum(weights)
    total = cum[-1]
    if not total > 0:
        return -1
    i = int(np.searchsorted(cum, rng.next_double() * total, side="right"))
    if i >= len(weights):
        i = int(np.flatnonzero(weights > 0)[-1])
    return i


def _uniform_other(n, chosen, rng):
    pool = np.setdiff1d(np.arange(n), chosen)
    return int(pool[rng.next_index(len(pool))])


def _dsquared(x, chosen, k, rng, metric):
    n = len(x)
    near = np.full(n, np.inf)
    for c in chosen:
        near = np.minimum(near, _to(x, c, metric) ** 2)
    while len(chosen) < k:
        w = near.copy()
        w[chosen] = 0.0
        j = _weighted_index(w, rng)
        if j < 0:
            j = _uniform_other(n, chosen, rng)
        chosen.append(j)
        near = np.minimum(near, _to(x, j, metric) ** 2)
    return chosen


def _kmeanspp(x, k, rng, metric):
    return _dsquared(x, [rng.next_index(len(x))], k, rng, metric)


def _ostrovsky(x, k, rng, metric):
    n = len(x)
    centered = x - x.mean(axis=0)
    sq = (centered * centered).sum(axis=1)
    # sum of squared distances from each point to all others
    spread = n * sq + sq.sum()
    first = _weighted_index(spread, rng)
    if first < 0:
        first = rng.next_index(n)
    if k == 1:
        return [first]
    w = _to(x, first, metric) ** 2
    w[first] = 0.0
    second = _weighted_index(w, rng)
    if second < 0:
        second = _uniform_other(n, [first], rng)
    return _dsquared(x, [first, second], k, rng, metric)


def _park(x, k, metric):
    d = condensed_matrix(x, metric).to_square() if len(x) > 1 else np.zeros((1, 1))
    totals = d.sum(axis=1)
    ok = totals > 0
    v = (d[ok] / totals[ok, None]).sum(axis=0)
    chosen = [int(i) for i in np.argsort(v, kind="stable")[:k]]
    if len(np.unique(x[chosen], axis=0)) < k:
        warnings.warn("park initialization chose duplicate points as centers", RuntimeWarning, stacklevel=3)
    return chosen


def _lab(x, k, rng, metric):
    n = len(x)
    size = 10 + math.ceil(math.sqrt(n))
    chosen: list[int] = []
    for _ in range(k):
        pool = np.setdiff1d(np.arange(n), chosen)
        sample = np.sort(pool[rng.sample_k(len(pool), min(size, len(pool)))])
        if len(sample) > 1:
            d = condensed_matrix(x[sample], metric).to_square()
        else:
            d = np.zeros((1, 1))
        if not chosen:
            pick = int(d.sum(axis=1).argmin())
        else:
            near = np.full(len(sample), np.inf)
            for c in chosen:
                near = np.minimum(near, pairwise_rows(x[sample], x[c][None, :], metric))
            pick = int(np.maximum(near[:, None] - d, 0.0).sum(axis=0).argmax())
        chosen.append(int(sample[pick]))
    return chosen


def _farthest(x, k, rng, metric, first, by_sum):
    n = len(x)
    chosen = [rng.next_index(n) if first is None else int(first)]
    if not 0 <= chosen[0] < n:
        raise ValueError(f"first point {chosen[0]} out of range")
    score = _to(x, chosen[0], metric)
    while len(chosen) < k:
        s = score.copy()
        s[chosen] = -np.inf
        j = int(s.argmax())
        chosen.append(j)
        d = _to(x, j, metric)
        score = score + d if by_sum else np.minimum(score, d)
    return chosen


def initialize(s, data, k: int, rng: Xoroshiro128Plus, metric: Metric | str = Metric.EUCLIDEAN) -> np.ndarray:
    """Point indices (int array) or generated vectors (float ``k x d`` array)."""
    s = strategy(s)
    x = as_points(data)
    n, dim = x.shape
    metric = Metric.parse(metric)
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    if s.kind == "predefined":
        c = np.asarray(s.centers, dtype=float)
        if c.shape != (k, dim):
            raise ValueError(f"predefined centers have shape {c.shape}, expected ({k}, {dim})")
        return c.copy()
    if s.kind == "uniform_generated":
        lo, hi = x.min(axis=0), x.max(axis=0)
        return np.array([[lo[j] + (hi[j] - lo[j]) * rng.next_double() for j in range(dim)] for _ in range(k)])
    if s.kind == "normal_generated":
        mu, sigma = x.mean(axis=0), x.std(axis=0)
        return np.array([[mu[j] + sigma[j] * rng.next_gaussian() for j in range(dim)] for _ in range(k)])
    if k > n:
        raise ValueError(f"k={k} exceeds the number of points ({n})")
    if s.kind == "first_k":
        idx = list(range(k))
    elif s.kind == "randomly_chosen":
        idx = rng.sample_k(n, k)
    elif s.kind == "kmeanspp":
        idx = _kmeanspp(x, k, rng, metric)
    elif s.kind == "ostrovsky":
        idx = _ostrovsky(x, k, rng, metric)
    elif s.kind == "pam_build":
        idx = list(pam_build(condensed_matrix(x, metric), k).medoids) if n > 1 else [0]
    elif s.kind == "park":
        idx = _park(x, k, metric)
    elif s.kind == "lab":
        idx = _lab(x, k, rng, metric)
    else:
        idx = _farthest(x, k, rng, metric, s.first, s.kind == "farthest_sum")
    return np.array(idx, dtype=np.int64)


def initial_means(s, data, k: int, rng: Xoroshiro128Plus, metric: Metric | str = Metric.EUCLIDEAN) -> np.ndarray:
    x = as_points(data)
    out = initialize(s, x, k, rng, metric)
    return out if out.dtype.kind == "f" else x[out].copy()


def initial_medoids(s, data, k: int, rng: Xoroshiro128Plus, metric: Metric | str = Metric.EUCLIDEAN) -> list[int]:
    s = strategy(s)
    if s.produces_vectors:
        raise ValueError(f"{s.kind} generates vectors and cannot choose medoids")
    return [int(i) for i in initialize(s, data, k, rng, metric)]
