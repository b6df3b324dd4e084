"""Flat clusterings cut from a :class:`~clusterkit.hac.MergeHistory`.

Merges are always applied in height order (stable), so histories with
inversions (centroid, median linkage) still give well-defined cuts.
Clusters are numbered by their lowest member index.
"""
from __future__ import annotations

import numpy as np

from .core import Clustering
from .hac import MergeHistory


def _height_order(h: MergeHistory) -> np.ndarray:
    return np.argsort(h.height, kind="stable")


def _replay(h: MergeHistory, order: np.ndarray, count: int) -> np.ndarray:
    """Component root of every point after applying ``order[:count]``."""
    n = h.n
    rep = np.arange(2 * n - 1)
    for t in range(n - 1):
        rep[n + t] = rep[h.left[t]]
    parent = np.arange(n)

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for t in order[:count]:
        ra, rb = find(rep[h.left[t]]), find(rep[h.right[t]])
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    return np.array([find(i) for i in range(n)])


def _label(roots: np.ndarray, keep=None, **stats) -> Clustering:
    labels = roots.copy()
    if keep is not None:
        labels[~keep] = -1
    return Clustering.from_labels(labels, stats=stats)


def cut_by_height(h: MergeHistory, threshold: float) -> Clustering:
    """Apply every merge with height ``<= threshold``."""
    order = _height_order(h)
    count = int(np.searchsorted(h.height[order], threshold, side="right"))
    return _label(_replay(h, order, count), merges_applied=count)


def cut_by_k(h: MergeHistory, k: int) -> Clustering:
    """Apply the lowest ``n - k`` merges, leaving exactly ``k`` clusters."""
    if not 1 <= k <= h.n:
        raise ValueError(f"k must be in [1, {h.n}], got {k}")
    return _label(_replay(h, _height_order(h), h.n - k), merges_applied=h.n - k)


def extract_with_noise(h: MergeHistory, k: int, minsize: int) -> Clustering:
    """Highest cut with ``k`` clusters of at least ``minsize`` points plus noise.

    Candidate cuts are those leaving at least ``k`` components, scanned from
    coarsest to finest. A cut is admissible when exactly ``k`` components
    have ``minsize`` or more points and every other component is a single
    point; those points become noise. When no cut qualifies the target is
    lowered to ``k - 1``, ``k - 2``, ... over the same candidates. The
    number of clusters achieved is ``result.num_clusters``; the request is
    kept in ``result.stats["requested_k"]``.
    """
    n = h.n
    if k < 1 or minsize < 1:
        raise ValueError("k and minsize must be at least 1")
    order = _height_order(h)
    top = max(n - k, 0)
    # per cut: (#large, all others singletons?) for 0..top merges
    sizes = np.ones(n, dtype=np.int64)
    large = int(minsize <= 1) * n
    small_multi = 0  # components with 2 <= size < minsize
    profile = [(large, small_multi == 0)]
    rep = np.arange(2 * n - 1)
    for t in range(n - 1):
        rep[n + t] = rep[h.left[t]]
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def classify(s):
        return (s >= minsize), (1 < s < minsize)

    for t in order[:top]:
        ra, rb = find(rep[h.left[t]]), find(rep[h.right[t]])
        if ra != rb:
            for r in (ra, rb):
                lg, sm = classify(sizes[r])
                large -= lg
                small_multi -= sm
            lo, hi = min(ra, rb), max(ra, rb)
            parent[hi] = lo
            sizes[lo] += sizes[hi]
            lg, sm = classify(sizes[lo])
            large += lg
            small_multi += sm
        profile.append((large, small_multi == 0))

    for target in range(k, 0, -1):
        for count in range(top, -1, -1):
            lg, clean = profile[count]
            if lg == target and clean:
                comp = _replay(h, order, count)
                counts = np.bincount(comp, minlength=n)
                keep = counts[comp] >= minsize
                return _label(comp, keep, merges_applied=count, requested_k=k, minsize=minsize)
    return Clustering(np.full(n, -1), 0, stats={"merges_applied": 0, "requested_k": k, "minsize": minsize})
