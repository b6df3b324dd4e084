import numpy as np
import pytest
from conftest import D2, gaussian_blobs
from hypothesis import given, settings
from hypothesis import strategies as st

from clusterkit.evaluation import sse as clustering_sse
from clusterkit.kmeans import EXACT_VARIANTS, KMeansConfig, run_kmeans

ACCELERATED = [v for v in EXACT_VARIANTS if v != "lloyd"]


def test_lloyd_d2():
    r = run_kmeans(D2, KMeansConfig(2), centers=[[0, 0], [4, 0]])
    assert r.assignment.tolist() == [0, 0, 1, 1]
    assert r.means.tolist() == [[0, 0.5], [4, 0.5]]
    assert r.sse == 1.0
    assert r.iterations == 2
    assert r.distance_computations == 16 == 4 * 2 * r.iterations


@pytest.mark.parametrize("variant", ACCELERATED)
def test_accelerated_d2(variant):
    r = run_kmeans(D2, KMeansConfig(2, variant), centers=[[0, 0], [4, 0]])
    assert r.assignment.tolist() == [0, 0, 1, 1]
    assert np.allclose(r.means, [[0, 0.5], [4, 0.5]], atol=1e-9)
    assert r.distance_computations <= 16


def test_single_cluster():
    x = gaussian_blobs(1, 30)
    r = run_kmeans(x, KMeansConfig(1), centers=x[:1])
    assert (r.assignment == 0).all()
    assert np.allclose(r.means[0], x.mean(axis=0))
    assert r.sse == pytest.approx(((x - x.mean(axis=0)) ** 2).sum())


def test_minusminus_example():
    x = np.array([[0.0], [1.0], [9.0], [10.0], [100.0]])
    r = run_kmeans(x, KMeansConfig(2, "minusminus", rate=0.2), centers=[[0], [9]])
    assert r.assignment.tolist() == [0, 0, 1, 1, -1]
    assert r.means.ravel().tolist() == [0.5, 9.5]
    assert r.clustering.assignment.tolist() == [0, 0, 1, 1, -1]


def test_minusminus_without_outliers_is_lloyd():
    x = gaussian_blobs(2, 60)
    c = x[[0, 1, 2]]
    a = run_kmeans(x, KMeansConfig(3, "minusminus", rate=0.01), centers=c)
    b = run_kmeans(x, KMeansConfig(3), centers=c)
    assert np.array_equal(a.assignment, b.assignment) and np.array_equal(a.means, b.means)


def test_minusminus_tie_flags_highest_index():
    x = np.ones((4, 2))
    r = run_kmeans(x, KMeansConfig(1, "minusminus", rate=0.25), centers=[[1, 1]])
    assert r.assignment.tolist() == [0, 0, 0, -1]
    assert r.means.tolist() == [[1, 1]]


def test_errors():
    with pytest.raises(ValueError, match="duplicate"):
        run_kmeans(D2, KMeansConfig(2), centers=[[0, 0], [0, 0]])
    with pytest.raises(ValueError, match="exceeds"):
        run_kmeans(D2, KMeansConfig(5))
    with pytest.raises(ValueError, match="shape"):
        run_kmeans(D2, KMeansConfig(2), centers=[[0, 0, 0], [1, 1, 1]])
    with pytest.raises(ValueError, match="rate"):
        KMeansConfig(2, "minusminus", rate=1.0)
    with pytest.raises(ValueError, match="unknown"):
        KMeansConfig(2, "bisecting")


def test_empty_cluster_keeps_its_mean():
    x = np.array([[0.0], [1.0], [2.0]])
    r = run_kmeans(x, KMeansConfig(2), centers=[[1.0], [50.0]])
    assert r.means[1, 0] == 50.0
    assert r.clustering.num_clusters == 1


def test_sse_trace_non_increasing_and_consistent(blobs):
    r = run_kmeans(blobs, KMeansConfig(5), centers=blobs[:5], trace=True)
    trace = r.sse_trace
    assert all(b <= a * (1 + 1e-12) for a, b in zip(trace, trace[1:]))
    assert r.sse == pytest.approx(clustering_sse(blobs, r.clustering), rel=1e-9)


def test_lloyd_counts_every_distance(blobs):
    r = run_kmeans(blobs, KMeansConfig(4), centers=blobs[:4])
    assert r.per_iteration == (200 * 4,) * r.iterations


@pytest.mark.parametrize("variant", ACCELERATED)
def test_identical_at_every_iteration(variant, blobs):
    c = blobs[[3, 50, 77, 120, 199]]
    for maxiter in range(1, 6):
        ref = run_kmeans(blobs, KMeansConfig(5, maxiter=maxiter), centers=c)
        r = run_kmeans(blobs, KMeansConfig(5, variant, maxiter=maxiter), centers=c)
        assert np.array_equal(r.assignment, ref.assignment)
        assert np.array_equal(r.means, ref.means)


@pytest.mark.parametrize("variant", ["elkan", "simplified_elkan", "hamerly", "annulus", "exponion"])
def test_bounds_stay_valid(variant):
    x = gaussian_blobs(4, 100)
    run_kmeans(x, KMeansConfig(6, variant), centers=x[:6], check_bounds=True)


@pytest.mark.parametrize("variant", ACCELERATED)
def test_fewer_distances_after_first_iteration(variant, blobs):
    c = blobs[:10]
    ref = run_kmeans(blobs, KMeansConfig(10), centers=c)
    r = run_kmeans(blobs, KMeansConfig(10, variant), centers=c)
    assert sum(r.per_iteration[1:]) < sum(ref.per_iteration[1:])


def test_macqueen_terminates_at_nearest_assignment(blobs):
    r = run_kmeans(blobs, KMeansConfig(4, "macqueen"), centers=blobs[:4])
    d = np.sqrt(((blobs[:, None, :] - r.means[None]) ** 2).sum(axis=2))
    assert np.all(d[np.arange(200), r.assignment] <= d.min(axis=1) + 1e-9)


def test_seeded_initialization_is_deterministic(blobs):
    a = run_kmeans(blobs, KMeansConfig(3, seed=9))
    b = run_kmeans(blobs, KMeansConfig(3, seed=9))
    assert np.array_equal(a.means, b.means)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(2, 6))
def test_exactness_on_random_data(seed, k):
    g = np.random.default_rng(seed)
    x = g.integers(0, 6, size=(30, 2)).astype(float)  # many ties
    centers = np.unique(x, axis=0)
    if len(centers) < k:
        return
    centers = centers[g.permutation(len(centers))[:k]]
    ref = run_kmeans(x, KMeansConfig(k), centers=centers)
    for variant in ACCELERATED:
        r = run_kmeans(x, KMeansConfig(k, variant), centers=centers, check_bounds=True)
        assert np.array_equal(r.assignment, ref.assignment), variant
        assert np.array_equal(r.means, ref.means), variant
