"""k-medoids: PAM BUILD/SWAP and its faster relatives, Park, CLARA, CLARANS.

All swap-based algorithms keep, per point, the nearest and second-nearest
medoid (distance and slot). Medoid slots keep their position when swapped,
and ties between medoids go to the lower slot.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core import Clustering, Metric, as_points, pairwise_rows
from .hac import CondensedDistanceMatrix, condensed_matrix
from .rng import make_rng

SWAP_ALGOS = ("pam", "reynolds", "fastpam1", "fastpam")


@dataclass(eq=False)
class MedoidResult:
    medoids: tuple  # point index per slot
    assignment: np.ndarray  # slot of the nearest medoid per point
    td: float
    swaps_performed: int = 0
    distance_computations: int = 0
    swap_evaluations: int = 0  # (medoid, non-medoid) candidates examined
    iterations: int = 0
    td_trace: tuple = ()
    stats: dict = field(default_factory=dict)

    @property
    def clustering(self) -> Clustering:
        k = len(self.medoids)
        present = np.bincount(self.assignment, minlength=k) > 0
        relabel = np.cumsum(present) - 1
        return Clustering(relabel[self.assignment], int(present.sum()),
                          prototypes=np.asarray(self.medoids)[present], stats=dict(self.stats))


def _square(m) -> np.ndarray:
    if isinstance(m, CondensedDistanceMatrix):
        return m.to_square()
    d = np.asarray(m, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise ValueError("expected a CondensedDistanceMatrix or a square matrix")
    return d


def _check_k(k, n):
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")


def _less(d1, s1, d2, s2):
    return (d1 < d2) | ((d1 == d2) & (s1 < s2))


class _Caches:
    """Nearest and second-nearest medoid for every point."""

    def __init__(self, dist: np.ndarray, medoids: Sequence[int]):
        self.dist = dist
        self.medoids = np.array(medoids, dtype=np.int64)
        n = len(dist)
        self.near = np.empty(n)
        self.nslot = np.empty(n, dtype=np.int64)
        self.sec = np.full(n, np.inf)
        self.sslot = np.full(n, -1, dtype=np.int64)
        self.refresh(np.arange(n))

    def refresh(self, rows):
        dm = self.dist[np.ix_(rows, self.medoids)]
        ar = np.arange(len(rows))
        best = dm.argmin(axis=1)
        self.nslot[rows] = best
        self.near[rows] = dm[ar, best]
        if dm.shape[1] > 1:
            dm[ar, best] = np.inf
            second = dm.argmin(axis=1)
            self.sslot[rows] = second
            self.sec[rows] = dm[ar, second]

    def swap(self, slot: int, h: int):
        self.medoids[slot] = h
        d = self.dist[:, h]
        stale = (self.nslot == slot) | (self.sslot == slot)
        fresh = ~stale
        to_near = fresh & _less(d, slot, self.near, self.nslot)
        to_sec = fresh & ~to_near & _less(d, slot, self.sec, self.sslot)
        self.sec[to_near], self.sslot[to_near] = self.near[to_near], self.nslot[to_near]
        self.near[to_near], self.nslot[to_near] = d[to_near], slot
        self.sec[to_sec], self.sslot[to_sec] = d[to_sec], slot
        self.refresh(np.flatnonzero(stale))

    def check(self, tol=1e-9):
        ref = _Caches(self.dist, self.medoids)
        assert np.allclose(self.near, ref.near, rtol=tol, atol=tol), "nearest-medoid cache is stale"
        assert np.allclose(self.sec, ref.sec, rtol=tol, atol=tol), "second-nearest cache is stale"

    @property
    def td(self) -> float:
        return float(self.near.sum())

    def nonmedoids(self) -> np.ndarray:
        mask = np.ones(len(self.dist), dtype=bool)
        mask[self.medoids] = False
        return np.flatnonzero(mask)


def _result(c: _Caches, **kw) -> MedoidResult:
    return MedoidResult(medoids=tuple(int(v) for v in c.medoids), assignment=c.nslot.copy(), td=c.td, **kw)


def pam_build(m, k: int) -> MedoidResult:
    """Greedy BUILD: start at the 1-medoid, then add the point with the largest TD reduction."""
    dist = _square(m)
    n = len(dist)
    _check_k(k, n)
    medoids = [int(dist.sum(axis=1).argmin())]
    near = dist[medoids[0]].copy()
    cost = n * n
    for _ in range(1, k):
        cand = np.ones(n, dtype=bool)
        cand[medoids] = False
        gain = np.maximum(near[:, None] - dist, 0.0).sum(axis=0)
        gain[~cand] = -np.inf
        j = int(gain.argmax())
        cost += int(cand.sum()) * n
        medoids.append(j)
        near = np.minimum(near, dist[j])
    c = _Caches(dist, medoids)
    return _result(c, distance_computations=cost, stats={"algorithm": "build"})


def _deltas_direct(c: _Caches, cols: np.ndarray) -> np.ndarray:
    """Swap cost of every (slot, candidate) pair, one slot at a time."""
    k = len(c.medoids)
    dh = c.dist[:, cols]
    out = np.empty((k, len(cols)))
    for i in range(k):
        kept = np.where((c.nslot == i)[:, None], c.sec[:, None], c.near[:, None])
        out[i] = (np.minimum(dh, kept) - c.near[:, None]).sum(axis=0)
    return out


def _deltas_reynolds(c: _Caches, cols: np.ndarray) -> np.ndarray:
    """Swap cost split into members of the removed medoid and everyone else."""
    k = len(c.medoids)
    dh = c.dist[:, cols]
    out = np.empty((k, len(cols)))
    for i in range(k):
        own = c.nslot == i
        lost = (np.minimum(dh[own], c.sec[own, None]) - c.near[own, None]).sum(axis=0)
        gained = np.minimum(dh[~own] - c.near[~own, None], 0.0).sum(axis=0)
        out[i] = lost + gained
    return out


def _deltas_shared(c: _Caches, cols: np.ndarray) -> np.ndarray:
    """All ``k`` swap costs per candidate in one pass over the points.

    The part where a candidate simply becomes a point's new nearest medoid
    is independent of the removed slot and computed once; only members of
    the removed medoid need a per-slot correction.
    """
    k = len(c.medoids)
    dh = c.dist[:, cols]
    improve = np.minimum(dh - c.near[:, None], 0.0)
    shared = improve.sum(axis=0)
    extra = np.minimum(dh, c.sec[:, None]) - c.near[:, None] - improve
    per_slot = np.zeros((k, len(cols)))
    for i in range(k):
        own = c.nslot == i
        if own.any():
            per_slot[i] = extra[own].sum(axis=0)
    return shared[None, :] + per_slot


_DELTAS = {"pam": _deltas_direct, "reynolds": _deltas_reynolds, "fastpam1": _deltas_shared}


def pam_swap(m, start, algo: str = "fastpam", *, tolerance: float = 1.0, maxiter: int = 0,
             check: bool = False) -> MedoidResult:
    """Improve medoids by swapping a medoid for a non-medoid while TD drops.

    ``pam``, ``reynolds`` and ``fastpam1`` apply the single best swap per pass
    (lowest cost; ties by slot, then point index) and therefore follow the
    same swap sequence. ``fastpam`` additionally applies, in the same pass,
    the best swap found for each other slot when its recomputed cost is
    still negative and at most ``(1 - tolerance)`` times its original cost.

    ``start`` is a :class:`MedoidResult` or a sequence of medoid indices;
    ``maxiter == 0`` runs until no swap improves.
    """
    if algo not in SWAP_ALGOS:
        raise ValueError(f"unknown swap algorithm {algo!r} (valid: {', '.join(SWAP_ALGOS)})")
    if not 0.0 <= tolerance <= 1.0:
        raise ValueError(f"tolerance must be in [0, 1], got {tolerance}")
    dist = _square(m)
    n = len(dist)
    medoids = start.medoids if isinstance(start, MedoidResult) else tuple(int(v) for v in start)
    _check_k(len(medoids), n)
    if len(set(medoids)) != len(medoids):
        raise ValueError("medoids must be distinct")
    c = _Caches(dist, medoids)
    k = len(medoids)
    deltas = _DELTAS.get(algo, _deltas_shared)
    swaps = evaluations = lookups = passes = 0
    trace = [c.td]
    while not (maxiter and passes >= maxiter):
        passes += 1
        cols = c.nonmedoids()
        if not len(cols):
            break
        full = deltas(c, cols)
        evaluations += len(cols) * (1 if algo in ("fastpam1", "fastpam") else k)
        lookups += len(cols) * n
        if algo == "fastpam":
            # best candidate per slot, applied best-first
            best_col = full.argmin(axis=1)
            best_cost = full[np.arange(k), best_col]
            order = np.lexsort((np.arange(k), best_cost))
            applied = 0
            for i in order:
                h, cached = int(cols[best_col[i]]), best_cost[i]
                if cached >= 0:
                    break
                if h in c.medoids:
                    continue
                if applied:
                    fresh = float(_deltas_shared(c, np.array([h]))[i, 0])
                    lookups += n
                    if not (fresh < 0 and fresh <= (1.0 - tolerance) * cached):
                        continue
                c.swap(int(i), h)
                applied += 1
                trace.append(c.td)
            if not applied:
                break
            swaps += applied
        else:
            flat = int(full.argmin())
            slot, j = divmod(flat, len(cols))
            if full[slot, j] >= 0:
                break
            c.swap(slot, int(cols[j]))
            swaps += 1
            trace.append(c.td)
        if check:
            c.check()
            assert trace[-1] < trace[-2] or algo == "fastpam", "swap did not decrease TD"
    return _result(c, swaps_performed=swaps, distance_computations=lookups, swap_evaluations=evaluations,
                   iterations=passes, td_trace=tuple(trace), stats={"algorithm": algo})


def run_pam(m, k: int, algo: str = "fastpam", *, tolerance: float = 1.0, maxiter: int = 0) -> MedoidResult:
    """BUILD followed by SWAP."""
    return pam_swap(m, pam_build(m, k), algo, tolerance=tolerance, maxiter=maxiter)


def run_park(m, k: int, medoids: Sequence[int], maxiter: int = 0) -> MedoidResult:
    """Alternate between per-cluster medoid updates and reassignment."""
    dist = _square(m)
    n = len(dist)
    medoids = [int(v) for v in medoids]
    if len(medoids) != k:
        raise ValueError(f"expected {k} starting medoids, got {len(medoids)}")
    _check_k(k, n)
    c = _Caches(dist, medoids)
    it = 0
    trace = [c.td]
    while not (maxiter and it >= maxiter):
        it += 1
        new = list(c.medoids)
        for slot in range(k):
            members = np.flatnonzero(c.nslot == slot)
            if len(members):
                within = dist[np.ix_(members, members)].sum(axis=1)
                new[slot] = int(members[within.argmin()])
        if new == list(c.medoids):
            break
        c = _Caches(dist, new)
        trace.append(c.td)
    return _result(c, iterations=it, td_trace=tuple(trace), stats={"algorithm": "park"})


def run_clara(data, k: int, *, numsamples: int = 5, samplesize: Optional[int] = None, fast: bool = False,
              keep_best: bool = True, seed=0, metric: Metric = Metric.EUCLIDEAN) -> MedoidResult:
    """PAM on random samples, judged by TD over the full data.

    After the first sample, the current best medoids are always part of
    the next sample when ``keep_best`` is set. The default sample size is
    ``40 + 2k``, doubled when ``fast`` (which also swaps with ``fastpam``).
    """
    x = as_points(data)
    n = len(x)
    _check_k(k, n)
    if numsamples < 1:
        raise ValueError("numsamples must be at least 1")
    if samplesize is None:
        samplesize = (80 + 4 * k) if fast else (40 + 2 * k)
    if samplesize < k:
        raise ValueError(f"samplesize {samplesize} is smaller than k={k}")
    samplesize = min(samplesize, n)
    metric = Metric.parse(metric)
    rng = make_rng(seed)
    best = None
    best_td = math.inf
    for _ in range(numsamples):
        if best is not None and keep_best:
            pool = np.setdiff1d(np.arange(n), best)
            extra = pool[rng.sample_k(len(pool), samplesize - k)] if samplesize > k else pool[:0]
            sample = np.sort(np.concatenate([best, extra]))
        else:
            sample = np.sort(np.array(rng.sample_k(n, samplesize)))
        sub = condensed_matrix(x[sample], metric) if len(sample) > 1 else np.zeros((1, 1))
        local = pam_swap(sub, pam_build(sub, k), "fastpam" if fast else "pam")
        medoids = sample[list(local.medoids)]
        full = _to_medoids(x, medoids, metric)
        td = float(full.min(axis=1).sum())
        if td < best_td:
            best, best_td = medoids, td
    full = _to_medoids(x, best, metric)
    assignment = full.argmin(axis=1)
    return MedoidResult(tuple(int(v) for v in best), assignment, float(full[np.arange(n), assignment].sum()),
                        distance_computations=numsamples * n * k, stats={"algorithm": "clara"})


def _to_medoids(x, medoids, metric):
    n, k = len(x), len(medoids)
    rows = np.repeat(np.arange(n), k)
    cols = np.tile(np.asarray(medoids), n)
    return pairwise_rows(x[rows], x[cols], metric).reshape(n, k)


def _neighbor_budget(maxneighbor, k, n) -> int:
    pairs = k * (n - k)
    if maxneighbor is None:
        return max(250, math.ceil(0.0125 * pairs))
    if isinstance(maxneighbor, float) and 0 < maxneighbor < 1:
        return max(1, math.ceil(maxneighbor * pairs))
    if maxneighbor < 0:
        raise ValueError("maxneighbor must be non-negative")
    return int(maxneighbor)


def run_clarans(m, k: int, *, numlocal: int = 2, maxneighbor=None, fast: bool = False, seed=0) -> MedoidResult:
    """Randomized swap search with restarts.

    Each restart begins at random medoids and samples untried neighbors
    (a medoid slot and a non-medoid, or only the non-medoid when ``fast``,
    taking the best slot for it). An improving neighbor is accepted at once
    and resets the budget; a restart ends after ``maxneighbor`` consecutive
    failures or when every neighbor has been tried. ``maxneighbor`` is a
    count, a fraction of the ``k (n - k)`` neighbors, or ``None`` for
    ``max(250, 1.25%)``.
    """
    dist = _square(m)
    n = len(dist)
    _check_k(k, n)
    if numlocal < 1:
        raise ValueError("numlocal must be at least 1")
    budget = _neighbor_budget(maxneighbor, k, n)
    rng = make_rng(seed)
    best = None
    swaps = evaluations = 0
    for _ in range(numlocal):
        c = _Caches(dist, rng.sample_k(n, k))
        cols = c.nonmedoids()
        width = len(cols)
        size = width if fast else k * width
        remaining = list(range(size))
        failures = 0
        while failures < budget and remaining:
            pick = rng.next_index(len(remaining))
            p = remaining[pick]
            remaining[pick] = remaining[-1]
            remaining.pop()
            if fast:
                cost = _deltas_shared(c, cols[p:p + 1])[:, 0]
                slot, h = int(cost.argmin()), int(cols[p])
                cost = cost[slot]
                evaluations += 1
            else:
                slot, h = divmod(p, width)
                h = int(cols[h])
                cost = _deltas_direct(c, np.array([h]))[slot, 0]
                evaluations += 1
            if cost < 0:
                c.swap(slot, h)
                swaps += 1
                cols = c.nonmedoids()
                remaining = list(range(size))
                failures = 0
            else:
                failures += 1
        if best is None or c.td < best.td:
            best = _result(c)
    best.swaps_performed = swaps
    best.swap_evaluations = evaluations
    best.stats = {"algorithm": "fastclarans" if fast else "clarans"}
    return best
