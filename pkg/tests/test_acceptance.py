"""Acceptance criteria; each test prints PASS/FAIL in the session summary."""
import itertools
import time

import numpy as np
import pytest
from conftest import D2, D3, gaussian_blobs
from oracles import (
    best_medoids,
    components,
    greedy_hac,
    minimax_radius,
    mst_weights,
    set_linkage,
    square_distances,
)

from clusterkit.cli import main
from clusterkit.core import Clustering
from clusterkit.evaluation import davies_bouldin, silhouette, sse, variance_ratio
from clusterkit.extraction import cut_by_height, cut_by_k, extract_with_noise
from clusterkit.hac import condensed_matrix, run_agnes, run_anderberg, run_minimax, run_nnchain, run_slink
from clusterkit.initialization import initial_means
from clusterkit.io import parse_assignments, parse_int_range, write_assignment
from clusterkit.kmeans import KMeansConfig, run_kmeans
from clusterkit.kmedoids import pam_build, pam_swap
from clusterkit.rng import make_rng

ACCELERATED = ("compare", "sort", "elkan", "simplified_elkan", "hamerly", "annulus", "exponion")


@pytest.fixture(scope="module")
def blobs():
    return gaussian_blobs(0, 200)


def _starts(x, k, seed):
    return initial_means("randomly_chosen", x, k, make_rng(seed))


def test_criterion_01_accelerated_kmeans_exactness(blobs):
    started = time.perf_counter()
    for seed in range(20):
        for k in (2, 5, 10):
            centers = _starts(blobs, k, seed)
            ref = run_kmeans(blobs, KMeansConfig(k), centers=centers)
            for variant in ACCELERATED:
                r = run_kmeans(blobs, KMeansConfig(k, variant), centers=centers)
                assert np.array_equal(r.assignment, ref.assignment), (seed, k, variant)
                assert np.allclose(r.means, ref.means, rtol=0, atol=1e-9), (seed, k, variant)
    elapsed = time.perf_counter() - started
    assert elapsed < 10, f"took {elapsed:.1f}s"


def test_criterion_02_pruning_effectiveness(blobs):
    for seed in range(20):
        centers = _starts(blobs, 10, seed)
        lloyd = sum(run_kmeans(blobs, KMeansConfig(10), centers=centers).per_iteration[1:])
        for variant in ("elkan", "hamerly"):
            pruned = sum(run_kmeans(blobs, KMeansConfig(10, variant), centers=centers).per_iteration[1:])
            assert pruned <= 0.5 * lloyd, (seed, variant, pruned, lloyd)


def test_criterion_03_fastpam1_equals_pam():
    g = np.random.default_rng(2024)
    for _ in range(50):
        n, k = int(g.integers(12, 101)), int(g.integers(2, 11))
        x = g.normal(size=(n, 2))
        m = condensed_matrix(x)
        assert len(np.unique(m.entries)) == len(m.entries), "distances must be distinct"
        start = pam_build(m, k)
        pam = pam_swap(m, start, "pam")
        fast = pam_swap(m, start, "fastpam1")
        reynolds = pam_swap(m, start, "reynolds")
        assert sorted(fast.medoids) == sorted(pam.medoids) and fast.td == pam.td
        assert reynolds.td == pytest.approx(pam.td, rel=1e-12)


def test_criterion_04_fastpam_k_speedup():
    x = np.random.default_rng(7).normal(size=(200, 2))
    m = condensed_matrix(x)
    ratios = []
    for k in (2, 4, 6, 8, 10):
        start = pam_build(m, k)
        pam = pam_swap(m, start, "pam")
        fast = pam_swap(m, start, "fastpam1")
        ratios.append(pam.swap_evaluations / fast.swap_evaluations)
    assert all(b > a for a, b in zip(ratios, ratios[1:])), ratios
    assert ratios[-1] > 10 / 2


HAC_KINDS = ("single", "complete", "group_average", "weighted_average", "ward", "min_variance")


def test_criterion_05_hac_engine_equivalence():
    failures = []
    for seed in range(30):
        x = np.random.default_rng(seed).normal(size=(40, 2))
        for kind in HAC_KINDS:
            squared = kind in ("ward", "min_variance")
            m = condensed_matrix(x, "squared_euclidean" if squared else "euclidean")
            ref = run_agnes(m, kind)
            for engine in (run_anderberg, run_nnchain):
                try:
                    h = engine(m, kind)
                except ValueError as exc:
                    failures.append(f"{kind}/{engine.__name__}: {exc}")
                    continue
                same = np.array_equal(h.left, ref.left) and np.array_equal(h.right, ref.right)
                if not (same and np.allclose(h.height, ref.height, rtol=1e-9, atol=0)):
                    failures.append(f"{kind}/{engine.__name__}: seed {seed} differs")
        m = condensed_matrix(x)
        s, a = run_slink(m), run_agnes(m, "single")
        if not (np.array_equal(s.left, a.left) and np.array_equal(s.height, a.height)):
            failures.append(f"slink: seed {seed} differs")
        if not np.allclose(sorted(s.height), mst_weights(square_distances(x)), rtol=1e-12):
            failures.append(f"slink: seed {seed} heights differ from MST")
    distinct = sorted(set(f.split(":")[0] for f in failures))
    assert not failures, f"{len(failures)} failures in {distinct}; first: {failures[0]}"


@pytest.mark.parametrize("kind", ["group_average", "ward", "centroid"])
def test_criterion_06_lance_williams_oracle(kind):
    for seed in range(10):
        x = np.random.default_rng(100 + seed).normal(size=(20, 2))
        metric = "euclidean" if kind == "group_average" else "squared_euclidean"
        dist = square_distances(x, metric)
        h = run_agnes(condensed_matrix(x, metric), kind)
        ref = greedy_hac(20, lambda a, b: set_linkage(kind, x, dist, a, b))
        members = h.members()
        for t, (a, b, height, _) in enumerate(h.merges()):
            assert (a, b) == ref[t][:2], (seed, t)
            exact = set_linkage(kind, x, dist, members[a], members[b])
            assert height == pytest.approx(exact, rel=1e-9), (seed, t)


def test_criterion_07_minimax_against_enumeration():
    g = np.random.default_rng(77)
    for n in range(2, 13):
        for _ in range(3):
            x = g.normal(size=(n, 2))
            dist = square_distances(x)
            ref = greedy_hac(n, lambda a, b: minimax_radius(dist, a + b)[0])
            for accel in ("matrix", "anderberg", "nnchain"):
                h = run_minimax(condensed_matrix(x), accel)
                members = h.members()
                for t, (a, b, height, _) in enumerate(h.merges()):
                    assert (a, b) == ref[t][:2]
                    radius, proto = minimax_radius(dist, members[n + t])
                    assert height == pytest.approx(radius, rel=1e-12)
                    assert h.prototypes[t] == proto


def test_criterion_08_extraction():
    g = np.random.default_rng(8)
    for _ in range(30):
        n = int(g.integers(2, 51))
        x = g.normal(size=(n, 2))
        dist = square_distances(x)
        h = run_slink(condensed_matrix(x))
        for threshold in g.uniform(0, 1.5, size=5):
            edges = [(i, j) for i, j in itertools.combinations(range(n), 2) if dist[i, j] <= threshold]
            got = cut_by_height(h, threshold).assignment.tolist()
            assert got == components(n, edges)
    for n in range(2, 31):
        x = g.normal(size=(n, 2))
        h = run_agnes(condensed_matrix(x), "complete")
        for k in range(1, n + 1):
            noisy = extract_with_noise(h, k, 1)
            assert np.array_equal(noisy.assignment, cut_by_k(h, k).assignment)


def test_criterion_09_kmeanspp_vs_uniform(blobs):
    def mean_sse(init):
        return np.mean([run_kmeans(blobs, KMeansConfig(3, seed=s, init=init)).sse for s in range(200)])

    plus, uniform = mean_sse("kmeanspp"), mean_sse("randomly_chosen")
    assert plus <= uniform * 1.01, (plus, uniform)


def test_criterion_10_desk_values():
    clustering = run_kmeans(D2, KMeansConfig(2), centers=[[0, 0], [4, 0]]).clustering
    assert sse(D2, clustering) == 1.0
    assert davies_bouldin(D2, clustering) == 0.25
    assert variance_ratio(D2, clustering) == 32.0
    assert silhouette(condensed_matrix(D2), clustering)[0] == pytest.approx(0.75379, abs=1e-4)
    m = condensed_matrix(D3)
    td, _ = best_medoids(square_distances(D3), 2)
    assert len(list(itertools.combinations(range(6), 2))) == 15
    assert pam_swap(m, pam_build(m, 2), "pam").td == td == 4.0


def test_criterion_11_determinism_and_io(tmp_path):
    points = tmp_path / "points.txt"
    g = np.random.default_rng(5)
    points.write_text("".join(f"{a!r} {b!r}\n" for a, b in g.normal(size=(40, 2)).tolist()), encoding="utf-8")
    outputs = []
    for name in ("a.txt", "b.txt"):
        out = tmp_path / name
        args = ["-i", str(points), "-o", str(out), "--param", "algorithm=kmeans", "--param", "kmeans.k=2,3,..,5",
                "--seed", "3", "--eval", "sse,silhouette"]
        assert main(args) == 0
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1]

    labels = [0, 2, 1, -1, 1, -1, 0]
    [(back, run_label)] = parse_assignments(write_assignment(Clustering(np.array(labels), 3), "k=3"))
    assert back.tolist() == labels and run_label == "k=3"

    values = parse_int_range("1,2,..,10,20,..,100,200,..,1000")
    assert values == tuple(range(1, 11)) + tuple(range(20, 101, 10)) + tuple(range(200, 1001, 100))
    assert len(values) == 28
