"""Agglomerative hierarchical clustering over a condensed distance matrix.

All engines emit the same :class:`MergeHistory`: merge ``t`` joins the
clusters ``left < right`` and creates cluster id ``n + t``. When several
pairs are equally close, the pair with the smallest ``(min id, max id)``
is merged first.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import Metric, as_points, pairwise_rows
from .linkage import LinkageScheme, _combine, scheme as _scheme

DEFAULT_MAX_ENTRIES = 10**8


class MatrixTooLargeError(ValueError):
    pass


class NonReducibleLinkageError(ValueError):
    pass


def _row_base(n: int, i):
    return i * n - (i * (i + 1)) // 2


class CondensedDistanceMatrix:
    """Upper-triangular pairwise dissimilarities in row-major order.

    Entry ``(i, j)`` with ``i < j`` lives at
    ``i*n - i*(i+1)/2 + (j - i - 1)``; the diagonal is implicitly zero.
    """

    def __init__(self, n: int, entries, *, max_entries: int = DEFAULT_MAX_ENTRIES):
        n = int(n)
        if n < 2:
            raise ValueError(f"need at least 2 points, got {n}")
        size = n * (n - 1) // 2
        if size > max_entries:
            raise MatrixTooLargeError(f"{size} matrix entries exceed the cap of {max_entries}")
        entries = np.array(entries, dtype=float, copy=True).ravel()
        if entries.shape[0] != size:
            raise ValueError(f"expected {size} entries for n={n}, got {entries.shape[0]}")
        if not np.isfinite(entries).all():
            raise ValueError("distance matrix contains NaN or infinite values")
        if (entries < 0).any():
            raise ValueError("distance matrix contains negative values")
        entries.setflags(write=False)
        self.n = n
        self.entries = entries

    @classmethod
    def from_square(cls, square, **kwargs) -> "CondensedDistanceMatrix":
        square = np.asarray(square, dtype=float)
        n = square.shape[0]
        if square.shape != (n, n):
            raise ValueError("square matrix expected")
        iu = np.triu_indices(n, 1)
        return cls(n, square[iu], **kwargs)

    def __len__(self):
        return self.entries.shape[0]

    def offset(self, i: int, j: int) -> int:
        if i == j or not (0 <= i < self.n and 0 <= j < self.n):
            raise IndexError(f"no entry for ({i}, {j})")
        if i > j:
            i, j = j, i
        return _row_base(self.n, i) + j - i - 1

    def get(self, i: int, j: int) -> float:
        if i == j:
            return 0.0
        return float(self.entries[self.offset(i, j)])

    def row_offsets(self, i: int) -> np.ndarray:
        """Offsets of ``(i, j)`` for every ``j``; the slot for ``j == i`` holds 0."""
        return _row_offsets(self.n, i)

    def row(self, i: int) -> np.ndarray:
        r = self.entries[self.row_offsets(i)].copy()
        r[i] = 0.0
        return r

    def to_square(self) -> np.ndarray:
        sq = np.zeros((self.n, self.n))
        iu = np.triu_indices(self.n, 1)
        sq[iu] = self.entries
        sq[(iu[1], iu[0])] = self.entries
        return sq


def _row_offsets(n: int, i: int) -> np.ndarray:
    j = np.arange(n)
    lo = np.minimum(i, j)
    hi = np.maximum(i, j)
    off = _row_base(n, lo) + hi - lo - 1
    off[i] = 0
    return off


def condensed_matrix(data, metric: Metric | str = Metric.EUCLIDEAN, *,
                     max_entries: int = DEFAULT_MAX_ENTRIES) -> CondensedDistanceMatrix:
    """All pairwise dissimilarities of the rows of ``data``."""
    x = as_points(data)
    n = x.shape[0]
    if n < 2:
        raise ValueError(f"need at least 2 points, got {n}")
    if n * (n - 1) // 2 > max_entries:
        raise MatrixTooLargeError(f"{n * (n - 1) // 2} matrix entries exceed the cap of {max_entries}")
    parts = [pairwise_rows(x[i + 1:], x[i], metric) for i in range(n - 1)]
    return CondensedDistanceMatrix(n, np.concatenate(parts), max_entries=max_entries)


@dataclass(frozen=True, eq=False)
class MergeHistory:
    """Dendrogram as ``n - 1`` ordered merges.

    Points are cluster ids ``0..n-1``; merge ``t`` creates id ``n + t``.
    ``prototypes`` is only set by MiniMax and holds the point index that
    represents each merged cluster.
    """

    n: int
    left: np.ndarray
    right: np.ndarray
    height: np.ndarray
    size: np.ndarray
    prototypes: Optional[np.ndarray] = None

    def __post_init__(self):
        for name in ("left", "right", "size"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=np.int64))
        object.__setattr__(self, "height", np.asarray(self.height, dtype=float))
        if self.prototypes is not None:
            object.__setattr__(self, "prototypes", np.asarray(self.prototypes, dtype=np.int64))
        self.validate()

    def __len__(self):
        return len(self.height)

    def validate(self):
        n = self.n
        if not (len(self.left) == len(self.right) == len(self.height) == len(self.size) == n - 1):
            raise ValueError("a history over n points needs exactly n - 1 merges")
        sizes = np.ones(2 * n - 1, dtype=np.int64)
        used = np.zeros(2 * n - 1, dtype=bool)
        for t in range(n - 1):
            a, b = int(self.left[t]), int(self.right[t])
            for c in (a, b):
                if not 0 <= c < n + t:
                    raise ValueError(f"merge {t} references unknown cluster {c}")
                if used[c]:
                    raise ValueError(f"cluster {c} merged twice")
                used[c] = True
            if a == b:
                raise ValueError(f"merge {t} joins cluster {a} with itself")
            sizes[n + t] = sizes[a] + sizes[b]
            if sizes[n + t] != self.size[t]:
                raise ValueError(f"merge {t} size {self.size[t]} != {sizes[n + t]}")

    def merges(self):
        for t in range(len(self)):
            yield int(self.left[t]), int(self.right[t]), float(self.height[t]), int(self.size[t])

    def members(self) -> list[list[int]]:
        """Point members of every cluster id ``0 .. 2n-2``."""
        out: list[list[int]] = [[i] for i in range(self.n)]
        for a, b, _, _ in self.merges():
            out.append(sorted(out[a] + out[b]))
        return out

    def is_monotone(self) -> bool:
        return bool(np.all(np.diff(self.height) >= 0))

    def to_pointer(self) -> tuple[np.ndarray, np.ndarray]:
        """SLINK pointer form ``(pi, lambda)``.

        At each merge, the largest point index of the side whose largest
        index is smaller points to the other side's largest index.
        """
        n = self.n
        top = list(range(n))
        pi = np.arange(n)
        lam = np.full(n, np.inf)
        for a, b, h, _ in self.merges():
            lo, hi = sorted((top[a], top[b]))
            pi[lo] = hi
            lam[lo] = h
            top.append(hi)
        return pi, lam

    @classmethod
    def from_pointer(cls, pi, lam) -> "MergeHistory":
        pi = np.asarray(pi, dtype=np.int64)
        lam = np.asarray(lam, dtype=float)
        n = len(pi)
        order = sorted((i for i in range(n) if np.isfinite(lam[i])), key=lambda i: (lam[i], i))
        if len(order) != n - 1:
            raise ValueError("pointer form must have exactly one root")
        return _history_from_records(n, [(i, int(pi[i]), float(lam[i]), -1) for i in order])


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.cid = list(range(n))

    def find(self, i: int) -> int:
        p = self.parent
        root = i
        while p[root] != root:
            root = p[root]
        while p[i] != root:
            p[i], i = root, p[i]
        return root

    def union(self, a: int, b: int, new_id: int) -> int:
        ra, rb = self.find(a), self.find(b)
        self.parent[rb] = ra
        self.cid[ra] = new_id
        return ra


def _history_from_records(n: int, records, *, sort: bool = False, prototypes: bool = False) -> MergeHistory:
    """Turn ``(point_a, point_b, height, prototype)`` records into cluster ids."""
    if sort:
        records = sorted(records, key=lambda r: r[2])
    uf = _UnionFind(n)
    size = [1] * (2 * n - 1)
    left, right, height, sizes, protos = [], [], [], [], []
    for t, (p, q, h, proto) in enumerate(records):
        ia, ib = uf.cid[uf.find(p)], uf.cid[uf.find(q)]
        if ia == ib:
            raise ValueError(f"record {t} merges a cluster with itself")
        uf.union(p, q, n + t)
        size[n + t] = size[ia] + size[ib]
        left.append(min(ia, ib))
        right.append(max(ia, ib))
        height.append(h)
        sizes.append(size[n + t])
        protos.append(proto)
    return MergeHistory(n, left, right, height, sizes, protos if prototypes else None)


# -- workspaces: cluster-to-cluster dissimilarities that engines scan and merge


class _LanceWilliamsWorkspace:
    def __init__(self, m: CondensedDistanceMatrix, linkage: LinkageScheme):
        self.n = m.n
        self.w = np.array(m.entries, dtype=float)
        self.alive = np.ones(self.n, dtype=bool)
        self.size = np.ones(self.n, dtype=np.int64)
        self.linkage = linkage

    def row(self, a: int) -> np.ndarray:
        r = self.w[_row_offsets(self.n, a)]
        r[a] = np.inf
        r[~self.alive] = np.inf
        return r

    def get(self, a: int, b: int) -> float:
        return float(self.w[_row_offsets(self.n, a)[b]])

    def prototype(self, a: int, b: int) -> int:
        return -1

    def merge(self, a: int, b: int):
        """Fold slot ``b`` into slot ``a``."""
        off_a = _row_offsets(self.n, a)
        off_b = _row_offsets(self.n, b)
        others = np.flatnonzero(self.alive)
        others = others[(others != a) & (others != b)]
        d_ab = self.w[off_a[b]]
        if len(others):
            self.w[off_a[others]] = _combine(
                self.linkage, self.w[off_a[others]], self.w[off_b[others]], d_ab,
                self.size[a], self.size[b], self.size[others])
        kill = off_b[np.arange(self.n) != b]
        self.w[kill] = np.inf
        self.alive[b] = False
        self.size[a] += self.size[b]


class _MiniMaxWorkspace:
    """Minimax linkage: ``d(A, B) = min_{p in AuB} max_{q in AuB} d(p, q)``.

    ``far[s, p]`` is the largest distance from point ``p`` to a member of
    the cluster in slot ``s``; the radius of a union is then
    ``min over members p of max(far[A, p], far[B, p])``.
    """

    def __init__(self, m: CondensedDistanceMatrix):
        n = self.n = m.n
        self.w = np.array(m.entries, dtype=float)
        iu = np.triu_indices(n, 1)
        self.proto = iu[0].astype(np.int64)  # two points: the lower index
        self.far = m.to_square()
        self.owner = np.arange(n)
        self.alive = np.ones(n, dtype=bool)

    row = _LanceWilliamsWorkspace.row
    get = _LanceWilliamsWorkspace.get

    def prototype(self, a: int, b: int) -> int:
        return int(self.proto[_row_offsets(self.n, a)[b]])

    def merge(self, a: int, b: int):
        n = self.n
        off_a = _row_offsets(n, a)
        off_b = _row_offsets(n, b)
        self.owner[self.owner == b] = a
        self.far[a] = np.maximum(self.far[a], self.far[b])
        others = np.flatnonzero(self.alive)
        others = others[(others != a) & (others != b)]
        if len(others):
            joint = np.maximum(self.far[a][None, :], self.far[others])
            mask = (self.owner[None, :] == others[:, None]) | (self.owner == a)[None, :]
            joint = np.where(mask, joint, np.inf)
            self.w[off_a[others]] = joint.min(axis=1)
            self.proto[off_a[others]] = joint.argmin(axis=1)
        self.w[off_b[np.arange(n) != b]] = np.inf
        self.alive[b] = False


# -- engines: each returns (slot_a, slot_b, height, prototype) records


def _pick_pair(cands_i, cands_j, ids) -> int:
    """Index into the candidate arrays of the lexicographically smallest id pair."""
    ia, ib = ids[cands_i], ids[cands_j]
    return int(np.lexsort((np.maximum(ia, ib), np.minimum(ia, ib)))[0])


def _engine_matrix(ws):
    n = ws.n
    ids = np.arange(n)
    rows, cols = np.triu_indices(n, 1)
    records = []
    for t in range(n - 1):
        h = ws.w.min()
        cand = np.flatnonzero(ws.w == h)
        o = cand[_pick_pair(rows[cand], cols[cand], ids)] if len(cand) > 1 else cand[0]
        a, b = int(rows[o]), int(cols[o])
        records.append((a, b, float(h), ws.prototype(a, b)))
        ws.merge(a, b)
        ids[a] = n + t
    return records


def _engine_anderberg(ws):
    n = ws.n
    ids = np.arange(n)
    nn = np.full(n, -1)
    nnd = np.full(n, np.inf)

    def refresh(i):
        r = ws.row(i)
        r[: i + 1] = np.inf
        h = r.min()
        if not np.isfinite(h):
            nn[i], nnd[i] = -1, np.inf
            return
        cand = np.flatnonzero(r == h)
        nn[i] = cand[np.argmin(ids[cand])]
        nnd[i] = h

    for i in range(n - 1):
        refresh(i)
    records = []
    for t in range(n - 1):
        h = nnd.min()
        rows = np.flatnonzero(nnd == h)
        i = rows[_pick_pair(rows, nn[rows], ids)] if len(rows) > 1 else rows[0]
        a, b = int(i), int(nn[i])
        records.append((a, b, float(h), ws.prototype(a, b)))
        ws.merge(a, b)
        ids[a] = n + t
        nn[b], nnd[b] = -1, np.inf
        refresh(a)
        stale = np.flatnonzero(ws.alive & ((nn == a) | (nn == b)))
        for i in stale:
            if i != a:
                refresh(i)
        # rows before a may now prefer the merged cluster; a new id never wins a tie
        r = ws.row(a)[:a]
        closer = np.flatnonzero(ws.alive[:a] & (r < nnd[:a]))
        nn[closer] = a
        nnd[closer] = r[closer]
    return records


def _engine_nnchain(ws):
    n = ws.n
    ids = np.arange(n)
    records = []
    chain: list[int] = []
    for t in range(n - 1):
        if not chain:
            chain.append(int(np.flatnonzero(ws.alive)[0]))
        while True:
            a = chain[-1]
            r = ws.row(a)
            h = r.min()
            prev = chain[-2] if len(chain) >= 2 else -1
            if prev >= 0 and r[prev] == h:
                b = prev
            else:
                cand = np.flatnonzero(r == h)
                b = int(cand[np.argmin(ids[cand])])
            if b == prev:
                break
            chain.append(b)
        chain.pop()
        chain.pop()
        keep, drop = min(a, b), max(a, b)
        records.append((keep, drop, float(h), ws.prototype(keep, drop)))
        ws.merge(keep, drop)
        ids[keep] = n + t
    return records


def _check_input(m: CondensedDistanceMatrix) -> CondensedDistanceMatrix:
    if not isinstance(m, CondensedDistanceMatrix):
        raise TypeError("expected a CondensedDistanceMatrix")
    return m


def run_agnes(m: CondensedDistanceMatrix, linkage: LinkageScheme | str = "ward") -> MergeHistory:
    """Naive O(n^3) agglomeration: merge the globally closest pair every step."""
    m = _check_input(m)
    return _history_from_records(m.n, _engine_matrix(_LanceWilliamsWorkspace(m, _scheme(linkage))))


def run_anderberg(m: CondensedDistanceMatrix, linkage: LinkageScheme | str = "ward") -> MergeHistory:
    """AGNES with a cached nearest neighbor per row.

    Output is identical to :func:`run_agnes`; only rows whose cached
    neighbor took part in a merge are rescanned.
    """
    m = _check_input(m)
    return _history_from_records(m.n, _engine_anderberg(_LanceWilliamsWorkspace(m, _scheme(linkage))))


def run_nnchain(m: CondensedDistanceMatrix, linkage: LinkageScheme | str = "ward") -> MergeHistory:
    """Nearest-neighbor chain clustering for reducible linkages.

    Reciprocal nearest neighbors are merged in discovery order; the merges
    are then stably sorted by height so the result matches the greedy
    engines. Flexible beta with ``beta != 0`` is the exception: its update
    depends on the order of merges, so the tree is valid but may differ.
    """
    m = _check_input(m)
    linkage = _scheme(linkage)
    if not linkage.reducible:
        raise NonReducibleLinkageError(f"non-reducible linkage {linkage} cannot use NN-chain")
    return _history_from_records(m.n, _engine_nnchain(_LanceWilliamsWorkspace(m, linkage)), sort=True)


def slink_pointer(m: CondensedDistanceMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Sibson's SLINK: the single-link pointer form ``(pi, lambda)``."""
    m = _check_input(m)
    n = m.n
    pi = np.zeros(n, dtype=np.int64)
    lam = np.full(n, np.inf)
    entries = m.entries
    for k in range(n):
        pi[k] = k
        if k == 0:
            continue
        col = _row_offsets(n, k)[:k]
        mk = entries[col].tolist()
        mk.append(np.inf)
        pil = pi.tolist()
        laml = lam.tolist()
        for i in range(k):
            p = pil[i]
            if laml[i] >= mk[i]:
                if laml[i] < mk[p]:
                    mk[p] = laml[i]
                laml[i] = mk[i]
                pil[i] = k
            elif mk[i] < mk[p]:
                mk[p] = mk[i]
        for i in range(k):
            if laml[i] >= laml[pil[i]]:
                pil[i] = k
        pi[:k] = pil[:k]
        lam[:k] = laml[:k]
    return pi, lam


def run_slink(m: CondensedDistanceMatrix) -> MergeHistory:
    """Single linkage via SLINK, converted to a :class:`MergeHistory`.

    Merges at equal heights are ordered with the matrix so the result is
    identical to ``run_agnes(m, "single")`` even on tied inputs.
    """
    pi, lam = slink_pointer(m)
    n = m.n
    order = sorted((i for i in range(n) if np.isfinite(lam[i])), key=lambda i: (lam[i], i))
    uf = _UnionFind(n)
    members = {i: [i] for i in range(n)}
    records = []

    square = None

    def join(p, q, h):
        rp, rq = uf.find(p), uf.find(q)
        records.append((p, q, h, -1))
        uf.union(rp, rq, n + len(records) - 1)
        members[rp] = members[rp] + members.pop(rq)

    g = 0
    while g < len(order):
        h = lam[order[g]]
        e = g
        while e < len(order) and lam[order[e]] == h:
            e += 1
        if e - g == 1:
            i = order[g]
            join(i, int(pi[i]), float(h))
        else:
            roots = {uf.find(q) for i in order[g:e] for q in (i, int(pi[i]))}
            pts = np.array(sorted(p for r in roots for p in members[r]))
            if square is None:
                square = m.to_square()
            sub = square[np.ix_(pts, pts)]
            ii, jj = np.nonzero(np.triu(sub == h, 1))
            for _ in range(e - g):
                comp = np.array([uf.find(int(p)) for p in pts])
                ok = comp[ii] != comp[jj]
                ci, cj = ii[ok], jj[ok]
                cid = np.array([uf.cid[c] for c in comp])
                o = _pick_pair(ci, cj, cid)
                join(int(pts[ci[o]]), int(pts[cj[o]]), float(h))
        g = e
    return _history_from_records(n, records)


MINIMAX_ACCELERATIONS = ("matrix", "anderberg", "nnchain")


def run_minimax(m: CondensedDistanceMatrix, accel: str = "matrix") -> MergeHistory:
    """Minimax linkage; every merge records its prototype point.

    ``accel`` picks the driver: the plain matrix scan, Anderberg's cached
    neighbors, or NN-chain (minimax linkage is reducible).
    """
    m = _check_input(m)
    engines = {"matrix": _engine_matrix, "anderberg": _engine_anderberg, "nnchain": _engine_nnchain}
    if accel not in engines:
        raise ValueError(f"unknown acceleration {accel!r} (valid: {', '.join(MINIMAX_ACCELERATIONS)})")
    records = engines[accel](_MiniMaxWorkspace(m))
    return _history_from_records(m.n, records, sort=accel == "nnchain", prototypes=True)


ENGINES = {
    "agnes": run_agnes,
    "anderberg": run_anderberg,
    "nnchain": run_nnchain,
}
