import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from fdaflock import alignment_gamma, centroid_path_length, distance_stats, interaction_components
from fdaflock.interaction import adjacency, neighbor_sets
from fdaflock.metrics import metrics_series


def complete(n):
    return ~np.eye(n, dtype=bool)


def test_gamma_parallel():
    assert alignment_gamma(np.tile([1.0, 2, 0], (4, 1)), complete(4)) == pytest.approx(1.0, abs=1e-15)


def test_gamma_antiparallel():
    assert alignment_gamma(np.array([[1.0, 0, 0], [-1, 0, 0]]), complete(2)) == -1.0


def test_gamma_orthogonal():
    assert alignment_gamma(np.eye(3), complete(3)) == 0.0


def test_gamma_excludes_isolated():
    v = np.array([[1.0, 0, 0], [1, 0, 0], [-1, 0, 0]])
    mask = np.zeros((3, 3), bool)
    mask[0, 1] = mask[1, 0] = True
    assert alignment_gamma(v, mask) == 1.0
    assert alignment_gamma(v, mask, isolated="zero") == pytest.approx(2 / 3)
    assert alignment_gamma(v, np.zeros((3, 3), bool)) == 0.0


def test_gamma_accepts_neighbor_sets():
    pos = np.array([[0.0, 0, 0], [1, 0, 0], [20, 0, 0]])
    v = np.array([[1.0, 0, 0], [0, 1, 0], [1, 0, 0]])
    assert alignment_gamma(v, neighbor_sets(pos, 7.5)) == alignment_gamma(v, adjacency(pos, 7.5))


def test_gamma_directed_mean_differs_from_pair_mean():
    # star: hub 0 with leaves 1..3; leaf 3 opposes the rest
    v = np.array([[1.0, 0, 0], [1, 0, 0], [1, 0, 0], [-1, 0, 0]])
    mask = np.zeros((4, 4), bool)
    for j in (1, 2, 3):
        mask[0, j] = mask[j, 0] = True
    hub = (1 + 1 - 1) / 3
    assert alignment_gamma(v, mask) == pytest.approx((hub + 1 + 1 - 1) / 4)


def rot(seed):
    q, _ = np.linalg.qr(np.random.default_rng(seed).normal(size=(3, 3)))
    return q


@given(arrays(float, (6, 3), elements=st.floats(-5, 5)), st.integers(0, 100),
       arrays(float, 6, elements=st.floats(0.1, 10)))
def test_gamma_rotation_and_scale_invariant(v, seed, scale):
    mask = complete(6)
    g = alignment_gamma(v, mask)
    speeds = np.linalg.norm(v, axis=1)
    if np.any(speeds < 1e-3):
        return
    assert alignment_gamma(v @ rot(seed).T, mask) == pytest.approx(g, abs=1e-12)
    assert alignment_gamma(v * scale[:, None], mask) == pytest.approx(g, abs=1e-12)


def test_distance_stats_examples():
    assert distance_stats(np.array([[0.0, 0, 0], [3, 0, 0]])) == (3.0, 3.0, 3.0)
    d = distance_stats(np.array([[0.0, 0, 0], [1, 0, 0], [2, 0, 0]]))
    assert d == pytest.approx((1.0, 4 / 3, 2.0), abs=1e-15)
    assert distance_stats(np.zeros((4, 3))) == (0.0, 0.0, 0.0)


@given(arrays(float, (7, 3), elements=st.floats(-10, 10)), arrays(float, 3, elements=st.floats(-50, 50)),
       st.integers(0, 100))
def test_distance_stats_invariant(p, shift, seed):
    a = distance_stats(p)
    b = distance_stats(p @ rot(seed).T + shift)
    assert np.allclose(a, b, atol=1e-9)
    assert a[0] <= a[1] <= a[2]


def test_path_length_examples():
    assert centroid_path_length(np.tile([1.0, 2, 3], (10, 1))) == 0.0
    assert centroid_path_length(np.zeros((1, 3))) == 0.0
    t = np.arange(1251) * 0.02
    c = np.stack([2 * t, 0 * t, 0 * t], axis=1)
    assert centroid_path_length(c) == pytest.approx(50.0, abs=1e-6)


@given(arrays(float, (30, 3), elements=st.floats(-10, 10)), st.integers(2, 7))
def test_subsampled_path_not_longer(c, k):
    assert centroid_path_length(c[::k]) <= centroid_path_length(c) + 1e-9


def test_components_examples():
    assert interaction_components(np.array([[0.0, 0, 0], [1, 0, 0], [2, 0, 0]]), 7.5) == 1
    two = np.array([[0.0, 0, 0], [1, 0, 0], [100, 0, 0], [101, 0, 0]])
    assert interaction_components(two, 7.5) == 2
    assert interaction_components(np.zeros((1, 3)), 7.5) == 1


def brute_components(pos, r):
    n = len(pos)
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x
    for i, j in itertools.combinations(range(n), 2):
        if math.dist(pos[i], pos[j]) <= r:
            parent[find(i)] = find(j)
    return len({find(i) for i in range(n)})


@settings(max_examples=50)
@given(arrays(float, (9, 2), elements=st.floats(0, 30)), st.floats(1, 12))
def test_components_against_union_find(pos, r):
    assert interaction_components(pos, r) == brute_components(pos.tolist(), r)


def test_series_matches_per_snapshot():
    rng = np.random.default_rng(4)
    P = rng.uniform(0, 12, (5, 8, 3))
    V = rng.normal(size=(5, 8, 3))
    ms = metrics_series(np.arange(5) * 0.1, P, V, 7.5)
    for k in range(5):
        assert ms["gamma"][k] == pytest.approx(alignment_gamma(V[k], adjacency(P[k], 7.5)), abs=1e-12)
        assert (ms["d_min"][k], ms["d_mean"][k], ms["d_max"][k]) == pytest.approx(distance_stats(P[k]), abs=1e-12)
        assert ms["components"][k] == interaction_components(P[k], 7.5)
    assert ms["S_cum"][-1] == pytest.approx(centroid_path_length(P.mean(axis=1)), abs=1e-12)
