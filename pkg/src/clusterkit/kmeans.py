"""Lloyd-style k-means with exact triangle-inequality accelerations.

Every variant except ``macqueen`` and ``minusminus`` computes exactly the
assignments Lloyd's algorithm would (nearest mean, ties to the lower
index), iteration by iteration; they differ only in how many
point-to-center distances they evaluate. Means are always recomputed by
the same routine, so identical assignments give bit-identical means.

Bounds are kept on Euclidean distances; squared distances are only used
for the reported SSE.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import Clustering, as_points

VARIANTS = (
    "lloyd",
    "macqueen",
    "compare",
    "sort",
    "elkan",
    "simplified_elkan",
    "hamerly",
    "annulus",
    "exponion",
    "minusminus",
)
EXACT_VARIANTS = ("lloyd", "compare", "sort", "elkan", "simplified_elkan", "hamerly", "annulus", "exponion")


@dataclass(frozen=True)
class KMeansConfig:
    k: int
    variant: str = "lloyd"
    maxiter: int = 0  # 0 runs to convergence
    rate: float = 0.05  # minusminus: fraction of points treated as outliers
    seed: int = 0
    init: str = "kmeanspp"

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown k-means variant {self.variant!r} (valid: {', '.join(VARIANTS)})")
        if self.k < 1:
            raise ValueError(f"k must be at least 1, got {self.k}")
        if self.maxiter < 0:
            raise ValueError("maxiter must be >= 0")
        if self.variant == "minusminus" and not 0 <= self.rate < 1:
            raise ValueError(f"outlier rate must be in [0, 1), got {self.rate}")


@dataclass(eq=False)
class KMeansResult:
    assignment: np.ndarray  # center index per point, -1 for minusminus outliers
    means: np.ndarray
    sse: float
    iterations: int
    distance_computations: int
    per_iteration: tuple  # point-to-center distances evaluated in each iteration
    clustering: Clustering
    sse_trace: Optional[tuple] = None


def _sqdist(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # fixed summation order: the same pair always yields the same bits
    diff = a - b
    out = diff[..., 0] * diff[..., 0]
    for j in range(1, diff.shape[-1]):
        out = out + diff[..., j] * diff[..., j]
    return out


def _dist(a, b):
    return np.sqrt(_sqdist(a, b))


def _full(x: np.ndarray, c: np.ndarray) -> np.ndarray:
    return _dist(x[:, None, :], c[None, :, :])


def _pairs(x, c, rows, cols):
    return _dist(x[rows], c[cols])


def update_means(x: np.ndarray, assign: np.ndarray, old: np.ndarray) -> np.ndarray:
    """Centroids of each label; empty clusters keep their previous mean."""
    k, d = old.shape
    counts = np.bincount(assign, minlength=k)
    new = old.copy()
    nz = counts > 0
    for j in range(d):
        s = np.bincount(assign, weights=x[:, j], minlength=k)
        new[nz, j] = s[nz] / counts[nz]
    return new


def _second_smallest(b: np.ndarray, best: np.ndarray):
    masked = b.copy()
    masked[np.arange(len(b)), best] = np.inf
    idx = masked.argmin(axis=1)
    return masked[np.arange(len(b)), idx], idx


class _Lloyd:
    def __init__(self, x, k):
        self.x, self.n, self.k = x, len(x), k

    def first(self, c):
        return _full(self.x, c).argmin(axis=1), self.n * self.k

    def step(self, c, a):
        return self.first(c)

    def moved(self, old, new, a):
        pass


class _Compare(_Lloyd):
    """Skip center j when ``d(best, j) > 2 d(x, best)``."""

    def step(self, c, a):
        x, n, k = self.x, self.n, self.k
        cc = _full(c, c)
        best = a.copy()
        bestd = _pairs(x, c, np.arange(n), a)
        count = n
        for j in range(k):
            idx = np.flatnonzero((a != j) & (cc[best, j] <= 2.0 * bestd))
            if not len(idx):
                continue
            d = _pairs(x, c, idx, np.full(len(idx), j))
            count += len(idx)
            better = (d < bestd[idx]) | ((d == bestd[idx]) & (j < best[idx]))
            best[idx[better]] = j
            bestd[idx[better]] = d[better]
        return best, count


class _Sort(_Lloyd):
    """Visit other centers by distance from the current one; stop early.

    Center j cannot win once ``d(a, j) > d(x, a) + best``; the centers after
    it in sorted order cannot either.
    """

    def step(self, c, a):
        x, n, k = self.x, self.n, self.k
        cc = _full(c, c)
        ranked = cc.copy()
        np.fill_diagonal(ranked, -1.0)
        order = np.argsort(ranked, axis=1, kind="stable")[:, 1:]
        da = _pairs(x, c, np.arange(n), a)
        best, bestd = a.copy(), da.copy()
        count = n
        active = np.ones(n, dtype=bool)
        for r in range(k - 1):
            j = order[a, r]
            active &= cc[a, j] <= da + bestd
            idx = np.flatnonzero(active)
            if not len(idx):
                break
            d = _pairs(x, c, idx, j[idx])
            count += len(idx)
            better = (d < bestd[idx]) | ((d == bestd[idx]) & (j[idx] < best[idx]))
            best[idx[better]] = j[idx[better]]
            bestd[idx[better]] = d[better]
        return best, count


class _Elkan(_Lloyd):
    """One upper bound and ``k`` lower bounds per point.

    The simplified form drops the center-separation test and with it the
    ``k x k`` center distance matrix.
    """

    def __init__(self, x, k, simplified=False):
        super().__init__(x, k)
        self.simplified = simplified

    def first(self, c):
        d = _full(self.x, c)
        a = d.argmin(axis=1)
        self.u = d[np.arange(self.n), a]
        self.l = d
        self.tight = np.ones(self.n, dtype=bool)
        return a, self.n * self.k

    def _candidates(self, rows, a, half):
        cand = self.u[rows, None] >= self.l[rows]
        if half is not None:
            cand &= self.u[rows, None] >= half[a[rows]]
        cand[np.arange(len(rows)), a[rows]] = False
        return cand

    def step(self, c, a):
        x, n, k = self.x, self.n, self.k
        half = None if self.simplified else 0.5 * _full(c, c)
        allrows = np.arange(n)
        cand = self._candidates(allrows, a, half)
        count = 0
        loose = np.flatnonzero(cand.any(axis=1) & ~self.tight)
        if len(loose):
            d = _pairs(x, c, loose, a[loose])
            count += len(loose)
            self.u[loose] = d
            self.l[loose, a[loose]] = d
            self.tight[loose] = True
            cand[loose] = self._candidates(loose, a, half)
        ri, ci = np.nonzero(cand)
        a = a.copy()
        if len(ri):
            d = _pairs(x, c, ri, ci)
            count += len(ri)
            self.l[ri, ci] = d
            rows = np.unique(ri)
            b = np.full((n, k), np.inf)
            b[ri, ci] = d
            b[rows, a[rows]] = self.u[rows]
            best = b[rows].argmin(axis=1)
            self.u[rows] = b[rows, best]
            a[rows] = best
        return a, count

    def moved(self, old, new, a):
        delta = _dist(old, new)
        self.u += delta[a]
        self.l = np.maximum(self.l - delta[None, :], 0.0)
        self.tight &= delta[a] == 0.0

    def check(self, c, a, tol=1e-9):
        d = _full(self.x, c)
        true_u = d[np.arange(self.n), a]
        assert np.all(self.l <= d * (1 + tol) + tol), "lower bound exceeds a true distance"
        assert np.all(self.u >= true_u * (1 - tol) - tol), "upper bound below the assigned distance"


class _Hamerly(_Lloyd):
    """One upper bound and one lower bound (second-closest center) per point.

    ``mode`` picks which centers are rescanned when the bounds fail:
    all of them (Hamerly), those whose norm lies within the annulus
    ``| |c| - |x| | <= max(u, d(x, c_second))`` (Annulus), or those within
    ``2u + s(a)`` of the current center, ``s(a)`` being the distance to its
    nearest other center (Exponion).
    """

    def __init__(self, x, k, mode="hamerly"):
        super().__init__(x, k)
        self.mode = mode
        if mode == "annulus":
            self.xnorm = np.sqrt(_sqdist(x, np.zeros_like(x)))

    def first(self, c):
        d = _full(self.x, c)
        a = d.argmin(axis=1)
        self.u = d[np.arange(self.n), a]
        if self.k > 1:
            self.l, self.second = _second_smallest(d, a)
        else:
            self.l = np.full(self.n, np.inf)
            self.second = a.copy()
        self.tight = np.ones(self.n, dtype=bool)
        return a, self.n * self.k

    def step(self, c, a):
        x, n, k = self.x, self.n, self.k
        if k == 1:
            return a, 0
        cc = _full(c, c)
        np.fill_diagonal(cc, np.inf)
        sep = cc.min(axis=1)
        bound = np.maximum(0.5 * sep[a], self.l)
        count = 0
        loose = np.flatnonzero((self.u >= bound) & ~self.tight)
        if len(loose):
            self.u[loose] = _pairs(x, c, loose, a[loose])
            self.tight[loose] = True
            count += len(loose)
        rows = np.flatnonzero(self.u >= bound)
        a = a.copy()
        if not len(rows):
            return a, count
        ar = a[rows]
        u = self.u[rows]
        b = np.full((len(rows), k), np.inf)
        b[np.arange(len(rows)), ar] = u
        if self.mode == "hamerly":
            cand = np.ones((len(rows), k), dtype=bool)
        elif self.mode == "annulus":
            sec = self.second[rows]
            dsec = _pairs(x, c, rows, sec)
            count += len(rows)
            b[np.arange(len(rows)), sec] = dsec
            radius = np.maximum(u, dsec)
            cnorm = np.sqrt(_sqdist(c, np.zeros_like(c)))
            cand = np.abs(cnorm[None, :] - self.xnorm[rows, None]) <= radius[:, None]
            cand[np.arange(len(rows)), sec] = False
        else:
            cand = cc[ar] <= (2.0 * u + sep[ar])[:, None]
        cand[np.arange(len(rows)), ar] = False
        ri, ci = np.nonzero(cand)
        if len(ri):
            b[ri, ci] = _pairs(x, c, rows[ri], ci)
            count += len(ri)
        best = b.argmin(axis=1)
        self.u[rows] = b[np.arange(len(rows)), best]
        self.l[rows], self.second[rows] = _second_smallest(b, best)
        a[rows] = best
        return a, count

    def moved(self, old, new, a):
        delta = _dist(old, new)
        self.u += delta[a]
        if self.k > 1:
            top = int(delta.argmax())
            rest = np.delete(delta, top)
            sub = np.where(a == top, rest.max(), delta[top])
            self.l = np.maximum(self.l - sub, 0.0)
        self.tight &= delta[a] == 0.0

    def check(self, c, a, tol=1e-9):
        d = _full(self.x, c)
        idx = np.arange(self.n)
        true_u = d[idx, a]
        assert np.all(self.u >= true_u * (1 - tol) - tol), "upper bound below the assigned distance"
        if self.k > 1:
            others = d.copy()
            others[idx, a] = np.inf
            assert np.all(self.l <= others.min(axis=1) * (1 + tol) + tol), "lower bound exceeds second distance"


_STEPPERS = {
    "lloyd": lambda x, k: _Lloyd(x, k),
    "compare": lambda x, k: _Compare(x, k),
    "sort": lambda x, k: _Sort(x, k),
    "elkan": lambda x, k: _Elkan(x, k),
    "simplified_elkan": lambda x, k: _Elkan(x, k, simplified=True),
    "hamerly": lambda x, k: _Hamerly(x, k),
    "annulus": lambda x, k: _Hamerly(x, k, "annulus"),
    "exponion": lambda x, k: _Hamerly(x, k, "exponion"),
}


def _sse(x, assign, means):
    keep = assign >= 0
    return float(_sqdist(x[keep], means[assign[keep]]).sum())


def _run_exact(x, c, variant, maxiter, trace, check_bounds):
    stepper = _STEPPERS[variant](x, len(c))
    a, cnt = stepper.first(c)
    counts = [cnt]
    sses = []
    it = 1
    while True:
        new_c = update_means(x, a, c)
        stepper.moved(c, new_c, a)
        c = new_c
        if trace:
            sses.append(_sse(x, a, c))
        if maxiter and it >= maxiter:
            break
        if check_bounds and hasattr(stepper, "check"):
            stepper.check(c, a)
        new_a, cnt = stepper.step(c, a)
        counts.append(cnt)
        it += 1
        if np.array_equal(new_a, a):
            break
        a = new_a
    return a, c, it, counts, sses


def _run_macqueen(x, c, maxiter, trace):
    n, k = len(x), len(c)
    a = _full(x, c).argmin(axis=1)
    counts = [n * k]
    means = update_means(x, a, c)
    sizes = np.bincount(a, minlength=k)
    sses = [_sse(x, a, means)] if trace else []
    it = 1
    while not (maxiter and it >= maxiter):
        changed = 0
        for i in range(n):
            j = int(_dist(x[i][None, :], means).argmin())
            o = a[i]
            if j == o:
                continue
            sizes[o] -= 1
            if sizes[o] > 0:
                means[o] -= (x[i] - means[o]) / sizes[o]
            sizes[j] += 1
            means[j] += (x[i] - means[j]) / sizes[j]
            a[i] = j
            changed += 1
        counts.append(n * k)
        it += 1
        if trace:
            sses.append(_sse(x, a, means))
        if not changed:
            break
    # report exact centroids rather than the incrementally drifted ones
    return a, update_means(x, a, means), it, counts, sses


def _run_minusminus(x, c, maxiter, n_out, trace):
    n, k = len(x), len(c)
    idx = np.arange(n)
    prev = None
    counts, sses = [], []
    it = 0
    while True:
        d = _full(x, c)
        a = d.argmin(axis=1)
        counts.append(n * k)
        it += 1
        lab = a.copy()
        if n_out:
            far = np.lexsort((-idx, -d[idx, a]))[:n_out]  # farthest first, ties to higher index
            lab[far] = -1
        if prev is not None and np.array_equal(lab, prev):
            break
        prev = lab
        keep = lab >= 0
        c = update_means(x[keep], lab[keep], c)
        if trace:
            sses.append(_sse(x, lab, c))
        if maxiter and it >= maxiter:
            break
    return prev, c, it, counts, sses


def _dense(assign: np.ndarray, means: np.ndarray) -> Clustering:
    k = len(means)
    present = np.bincount(assign[assign >= 0], minlength=k) > 0
    relabel = np.cumsum(present) - 1
    out = np.where(assign >= 0, relabel[np.maximum(assign, 0)], -1)
    return Clustering(out, int(present.sum()), prototypes=means[present])


def run_kmeans(data, cfg: KMeansConfig, centers=None, *, trace: bool = False,
               check_bounds: bool = False) -> KMeansResult:
    """Run one k-means variant from explicit or initialized centers.

    Parameters
    ----------
    data : Dataset or array-like
        ``n x d`` points.
    cfg : KMeansConfig
        ``maxiter == 0`` iterates until no assignment changes.
    centers : array-like, optional
        ``k x d`` distinct starting means. When omitted, ``cfg.init`` is
        run with a generator seeded from ``cfg.seed``.
    trace : bool
        Record the SSE after every mean update in ``sse_trace``.
    check_bounds : bool
        Assert bound validity each iteration (bounded variants only).
    """
    x = as_points(data)
    n = len(x)
    if cfg.k > n:
        raise ValueError(f"k={cfg.k} exceeds the number of points ({n})")
    if centers is None:
        from .initialization import initial_means
        from .rng import make_rng

        centers = initial_means(cfg.init, x, cfg.k, make_rng(cfg.seed))
    c = np.array(centers, dtype=float, copy=True)
    if c.ndim != 2 or c.shape != (cfg.k, x.shape[1]):
        raise ValueError(f"centers must have shape ({cfg.k}, {x.shape[1]}), got {c.shape}")
    if len(np.unique(c, axis=0)) != len(c):
        raise ValueError("duplicate initial centers")

    if cfg.variant == "macqueen":
        a, c, it, counts, sses = _run_macqueen(x, c, cfg.maxiter, trace)
    elif cfg.variant == "minusminus":
        n_out = int(np.floor(cfg.rate * n))
        if n_out >= n:
            raise ValueError(f"{n_out} outliers leave no points to cluster")
        a, c, it, counts, sses = _run_minusminus(x, c, cfg.maxiter, n_out, trace)
    else:
        a, c, it, counts, sses = _run_exact(x, c, cfg.variant, cfg.maxiter, trace, check_bounds)

    clustering = _dense(a, c)
    clustering.stats = {"iterations": it, "distance_computations": int(sum(counts))}
    return KMeansResult(
        assignment=a,
        means=c,
        sse=_sse(x, a, c),
        iterations=it,
        distance_computations=int(sum(counts)),
        per_iteration=tuple(counts),
        clustering=clustering,
        sse_trace=tuple(sses) if trace else None,
    )
