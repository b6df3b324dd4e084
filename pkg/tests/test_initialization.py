import numpy as np
import pytest
from conftest import D1

from clusterkit.initialization import KINDS, InitStrategy, initial_means, initial_medoids, initialize
from clusterkit.rng import make_rng

STOCHASTIC = ["randomly_chosen", "uniform_generated", "normal_generated", "kmeanspp", "ostrovsky", "lab",
              "farthest_points", "farthest_sum"]


def points(seed=0, n=60):
    return np.random.default_rng(seed).normal(size=(n, 2))


def test_first_k():
    assert initialize("first_k", D1, 2, make_rng(0)).tolist() == [0, 1]


def test_farthest_points_with_forced_first():
    chosen = initialize(InitStrategy("farthest_points", first=0), D1, 2, make_rng(0))
    assert D1[chosen].ravel().tolist() == [0, 7]


def test_farthest_sum_prefers_total_distance():
    x = np.array([[0.0], [1.0], [10.0], [5.0]])
    chosen = initialize(InitStrategy("farthest_sum", first=0), x, 3, make_rng(0))
    # after 0 and 10 the sums are 1+9=10 and 5+5=10; the lower index wins
    assert chosen.tolist() == [0, 2, 1]


def test_kmeanspp_two_points():
    x = np.array([[0.0], [10.0]])
    for seed in range(50):
        assert sorted(initialize("kmeanspp", x, 2, make_rng(seed)).tolist()) == [0, 1]


def test_kmeanspp_skips_duplicates_of_chosen_centers():
    x = np.array([[0.0]] * 10 + [[1.0], [2.0]])
    for seed in range(100):
        chosen = initialize("kmeanspp", x, 3, make_rng(seed))
        assert len(np.unique(x[chosen])) == 3


def test_kmeanspp_falls_back_to_uniform_on_zero_weight():
    x = np.zeros((5, 1))
    chosen = initialize("kmeanspp", x, 3, make_rng(1))
    assert len(set(chosen.tolist())) == 3


@pytest.mark.parametrize("kind", STOCHASTIC)
def test_deterministic_given_seed(kind):
    x = points()
    a = initialize(kind, x, 4, make_rng(17))
    b = initialize(kind, x, 4, make_rng(17))
    assert np.array_equal(a, b)


@pytest.mark.parametrize("kind", [k for k in KINDS if k not in ("predefined", "uniform_generated", "normal_generated")])
def test_index_strategies_pick_distinct_points(kind):
    chosen = initialize(kind, points(1), 5, make_rng(2))
    assert chosen.dtype.kind == "i" and len(set(chosen.tolist())) == 5


def test_uniform_within_bounds():
    x = points(2)
    c = initialize("uniform_generated", x, 50, make_rng(3))
    assert np.all(c >= x.min(axis=0)) and np.all(c <= x.max(axis=0))


def test_normal_generated_uses_population_moments():
    x = np.array([[0.0, 1.0], [2.0, 1.0], [4.0, 7.0]])
    rng = make_rng(4)
    c = initialize("normal_generated", x, 2, rng)
    replay = make_rng(4)
    mu, sigma = x.mean(axis=0), np.sqrt(((x - x.mean(axis=0)) ** 2).mean(axis=0))
    expected = [[mu[j] + sigma[j] * replay.next_gaussian() for j in range(2)] for _ in range(2)]
    assert np.allclose(c, expected, rtol=1e-15)


def test_park_warns_on_duplicates():
    x = np.array([[0.0], [0.0], [0.0], [10.0]])
    with pytest.warns(RuntimeWarning, match="duplicate"):
        chosen = initialize("park", x, 2, make_rng(0))
    assert chosen.tolist() == [0, 1]


def test_park_permutation_invariant():
    x = points(5, 30)
    perm = np.random.default_rng(0).permutation(30)
    chosen = initialize("park", x, 3, make_rng(0))
    chosen_perm = initialize("park", x[perm], 3, make_rng(0))
    assert sorted(perm[chosen_perm].tolist()) == sorted(chosen.tolist())


def test_pam_build_strategy_matches_build():
    from clusterkit.hac import condensed_matrix
    from clusterkit.kmedoids import pam_build

    x = points(6, 40)
    assert initialize("pam_build", x, 3, make_rng(0)).tolist() == list(pam_build(condensed_matrix(x), 3).medoids)


def test_predefined_and_errors():
    x = points()
    c = initial_means(InitStrategy("predefined", centers=((0, 0), (1, 1))), x, 2, make_rng(0))
    assert c.tolist() == [[0, 0], [1, 1]]
    with pytest.raises(ValueError, match="shape"):
        initialize(InitStrategy("predefined", centers=((0, 0),)), x, 2, make_rng(0))
    with pytest.raises(ValueError, match="exceeds"):
        initialize("kmeanspp", D1, 5, make_rng(0))
    with pytest.raises(ValueError, match="vectors"):
        initial_medoids("uniform_generated", x, 2, make_rng(0))
    with pytest.raises(ValueError, match="unknown"):
        InitStrategy("sample_kmeans")


def test_initial_means_copies_points():
    x = points()
    c = initial_means("first_k", x, 3, make_rng(0))
    assert np.array_equal(c, x[:3])
