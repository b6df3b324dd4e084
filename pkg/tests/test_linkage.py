import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clusterkit.linkage import KINDS, LinkageScheme, coefficients, combine

sizes = st.integers(1, 1000)


def test_ward_unit_coefficients():
    c = coefficients("ward", 1, 1, 1)
    assert c == pytest.approx((2 / 3, 2 / 3, -1 / 3, 0))


def test_single_and_complete_coefficients():
    assert coefficients("single", 3, 7, 2) == (0.5, 0.5, 0.0, -0.5)
    assert coefficients("complete", 1, 1, 9) == (0.5, 0.5, 0.0, 0.5)


def test_min_variance_unit_coefficients():
    assert coefficients("min_variance", 1, 1, 1) == pytest.approx((4 / 9, 4 / 9, -2 / 9, 0))


def test_group_average_centroid_median_coefficients():
    assert coefficients("group_average", 1, 3, 5)[:3] == pytest.approx((0.25, 0.75, 0))
    assert coefficients("centroid", 1, 3, 5)[:3] == pytest.approx((0.25, 0.75, -3 / 16))
    assert coefficients("median", 4, 9, 1) == (0.5, 0.5, -0.25, 0.0)


def test_flexible_beta():
    assert LinkageScheme("flexible_beta").beta == -0.25
    assert coefficients(LinkageScheme("flexible_beta", 0.0), 2, 3, 4) == coefficients("weighted_average", 2, 3, 4)
    assert coefficients(LinkageScheme("flexible_beta", -0.5), 1, 1, 1) == (0.75, 0.75, -0.5, 0.0)
    for beta in (-1.0, 1.0, 2.0):
        with pytest.raises(ValueError):
            LinkageScheme("flexible_beta", beta)


def test_aliases_and_errors():
    assert LinkageScheme("UPGMA").kind == "group_average"
    assert LinkageScheme("wpgma").kind == "weighted_average"
    with pytest.raises(ValueError, match="unknown linkage"):
        LinkageScheme("clink")
    with pytest.raises(ValueError):
        LinkageScheme("ward", 0.1)
    with pytest.raises(ValueError, match="at least 1"):
        coefficients("ward", 0, 1, 1)


def test_squared_input_flag():
    expected = {"centroid", "median", "ward", "min_variance"}
    assert {k for k in KINDS if k != "flexible_beta" and LinkageScheme(k).squared_input_expected} == expected


def test_combine_single_is_minimum():
    assert combine("single", 2, 5, 9, 1, 1, 1) == 2


def test_combine_group_average_against_pair_average():
    # A = {a}, B = {b1, b2, b3}; C = {c}; d(B, C) is already the mean of its three pairs
    pair_distances = {"a": 3.0, "b1": 4.0, "b2": 5.0, "b3": 6.0}
    d_bc = np.mean([pair_distances[p] for p in ("b1", "b2", "b3")])
    expected = np.mean(list(pair_distances.values()))
    assert combine("group_average", 3.0, d_bc, 1.0, 1, 3, 1) == pytest.approx(expected) == 4.5


def _ward_oracle(a, b):
    a, b = np.asarray(a, float), np.asarray(b, float)
    na, nb = len(a), len(b)
    return 2 * na * nb / (na + nb) * float((a.mean() - b.mean()) ** 2)


def test_combine_ward_against_centroid_oracle():
    points = {"A": [0.0], "B": [1.0], "C": [3.0]}
    d = {(x, y): _ward_oracle(points[x], points[y]) for x, y in itertools.combinations("ABC", 2)}
    got = combine("ward", d["A", "C"], d["B", "C"], d["A", "B"], 1, 1, 1)
    # with unit clusters the oracle equals the squared distances 9, 4, 1
    assert (d["A", "C"], d["B", "C"], d["A", "B"]) == (9, 4, 1)
    assert got == pytest.approx(_ward_oracle(points["A"] + points["B"], points["C"])) == pytest.approx(25 / 3)


def test_combine_vectorizes():
    out = combine("group_average", np.array([1.0, 2.0]), np.array([3.0, 4.0]), 0.5, 1, 1, np.array([1, 2]))
    assert out.tolist() == [2.0, 3.0]


@settings(max_examples=200)
@given(sizes, sizes, sizes)
def test_ward_coefficients_sum_to_one(na, nb, nc):
    c = coefficients("ward", na, nb, nc)
    assert math.isclose(c.alpha1 + c.alpha2 + c.beta, 1.0, rel_tol=1e-12)


@settings(max_examples=200)
@given(sizes, sizes, sizes)
def test_centroid_and_median_weights_sum_to_one(na, nb, nc):
    for kind in ("centroid", "median"):
        c = coefficients(kind, na, nb, nc)
        assert math.isclose(c.alpha1 + c.alpha2, 1.0, rel_tol=1e-12)


REDUCIBLE = ["single", "complete", "group_average", "weighted_average", "ward", LinkageScheme("flexible_beta", -0.5)]


@settings(max_examples=300)
@given(st.floats(0.0, 100.0), st.floats(0.0, 100.0), st.floats(0.0, 1.0), sizes, sizes, sizes)
def test_reducible_schemes_never_shrink(d_ac, d_bc, frac, na, nb, nc):
    # A and B are the closest pair of the triple
    lo = min(d_ac, d_bc)
    d_ab = frac * lo
    for kind in REDUCIBLE:
        assert combine(kind, d_ac, d_bc, d_ab, na, nb, nc) >= lo * (1 - 1e-12) - 1e-300


def test_min_variance_is_not_reducible():
    # three equidistant unit clusters: the union comes closer than either part
    assert combine("min_variance", 1.0, 1.0, 1.0, 1, 1, 1) == pytest.approx(2 / 3)
    assert not LinkageScheme("min_variance").reducible


def test_centroid_can_invert():
    # equilateral triple on squared distances
    assert combine("centroid", 1.0, 1.0, 1.0, 1, 1, 1) == pytest.approx(0.75)
    assert not LinkageScheme("centroid").reducible and not LinkageScheme("median").reducible
