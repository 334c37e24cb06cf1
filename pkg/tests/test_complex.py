import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from decorated_reeb.complex import (
    UnionFind,
    build_rips,
    connected_components,
    connectivity_threshold,
    cross_edges,
    shortest_path_metric,
)
from oracles import bfs_components, connectivity_by_kruskal, floyd_warshall, naive_distances
from oracles import rips_by_enumeration

small_clouds = arrays(
    np.float64,
    st.tuples(st.integers(2, 9), st.just(2)),
    elements=st.floats(-5, 5, allow_nan=False, width=16),
)


def circle(n, radius=1.0):
    t = np.linspace(0, 2 * np.pi, n, endpoint=False)
    return radius * np.c_[np.cos(t), np.sin(t)]


def equilateral():
    return np.array([[0, 1, 1], [1, 0, 1], [1, 1, 0]], dtype=float)


def test_boundary_case_d_equals_2r():
    cx = build_rips(equilateral(), 0.5)
    assert cx.n_edges == 3 and cx.n_triangles == 1
    np.testing.assert_array_equal(cx.triangle_values, [0.5])


def test_just_below_boundary_has_no_edges():
    cx = build_rips(equilateral(), 0.49)
    assert cx.n_edges == 0 and cx.n_triangles == 0


def test_max_dim_one_skips_triangles():
    cx = build_rips(equilateral(), 0.5, max_dim=1)
    assert cx.n_edges == 3 and cx.n_triangles == 0


def test_rips_matches_enumeration():
    D = naive_distances(np.random.default_rng(8).random((8, 2)))
    for r in (0.1, 0.25, 0.4, 1.0):
        cx = build_rips(D, r)
        edges, tris = rips_by_enumeration(D, r)
        assert set(map(tuple, cx.edges.tolist())) == edges
        assert set(map(tuple, cx.triangles.tolist())) == tris
        for (i, j), v in zip(cx.edges.tolist(), cx.edge_values):
            assert v == D[i, j] / 2
        for (a, b, c), v in zip(cx.triangles.tolist(), cx.triangle_values):
            assert v == max(D[a, b], D[a, c], D[b, c]) / 2


@settings(max_examples=40, deadline=None)
@given(small_clouds, st.floats(0, 3), st.floats(0, 3))
def test_rips_monotone_in_scale(X, r1, r2):
    lo, hi = sorted((r1, r2))
    D = naive_distances(X)
    a, b = build_rips(D, lo), build_rips(D, hi)
    assert set(map(tuple, a.edges.tolist())) <= set(map(tuple, b.edges.tolist()))
    assert set(map(tuple, a.triangles.tolist())) <= set(map(tuple, b.triangles.tolist()))
    # faces never valued above cofaces
    ev = {tuple(e): v for e, v in zip(b.edges.tolist(), b.edge_values)}
    for (p, q, s), v in zip(b.triangles.tolist(), b.triangle_values):
        assert max(ev[(p, q)], ev[(p, s)], ev[(q, s)]) <= v


def test_connectivity_threshold_examples():
    assert connectivity_threshold(np.array([[0, 4.0], [4.0, 0]])) == 2.0
    line = np.array([0.0, 1.0, 2.0, 10.0])
    D = np.abs(line[:, None] - line[None, :])
    assert connectivity_threshold(D) == 4.0 == connectivity_by_kruskal(D)
    assert connectivity_threshold(np.zeros((1, 1))) == 0.0


def test_connectivity_threshold_matches_kruskal_and_is_tight():
    rng = np.random.default_rng(9)
    for _ in range(10):
        D = naive_distances(rng.random((15, 3)))
        r0 = connectivity_threshold(D)
        assert r0 == connectivity_by_kruskal(D)
        cx = build_rips(D, r0, max_dim=1)
        assert connected_components(cx).n_components == 1
        below = build_rips(D, r0 * (1 - 1e-6), max_dim=1)
        assert connected_components(below).n_components > 1


def test_components_of_disconnected_pair():
    D = np.array([[0, 5.0], [5.0, 0]])
    lab = connected_components(build_rips(D, 1.0), [0, 1])
    assert lab.n_components == 2


def test_components_of_single_vertex_and_empty_subset():
    cx = build_rips(naive_distances(circle(10)), 0.5)
    assert connected_components(cx, [3]).n_components == 1
    with pytest.raises(ValueError):
        connected_components(cx, [])


def test_circle_is_one_component_and_matches_bfs():
    D = naive_distances(circle(40))
    cx = build_rips(D, connectivity_threshold(D) * 2, max_dim=1)
    lab = connected_components(cx)
    assert lab.n_components == 1
    edges = cx.edges.tolist()
    assert {frozenset(g.tolist()) for g in lab.groups()} == bfs_components(40, edges)


@settings(max_examples=50, deadline=None)
@given(small_clouds, st.floats(0.05, 2), st.lists(st.integers(0, 8), min_size=1, unique=True))
def test_components_match_bfs(X, r, subset):
    n = X.shape[0]
    subset = [v for v in subset if v < n] or [0]
    cx = build_rips(naive_distances(X), r, max_dim=1)
    lab = connected_components(cx, subset)
    got = {frozenset(g.tolist()) for g in lab.groups()}
    assert got == bfs_components(n, cx.edges.tolist(), subset)
    # ids contiguous, ordered by smallest member
    assert sorted(set(lab.labels.tolist())) == list(range(lab.n_components))
    mins = [g.min() for g in lab.groups()]
    assert mins == sorted(mins)


def test_cross_edges():
    x = np.linspace(0, 1, 11)[:, None]
    cx = build_rips(naive_distances(x), 0.05)
    assert cross_edges(cx, [0, 1, 2, 3, 4], [5, 6, 7])
    # edge-scan oracle
    for a, b in [([0, 1], [2, 3]), ([0, 1], [5, 6]), ([9], [10])]:
        expected = any(
            (i in a and j in b) or (i in b and j in a) for i, j in cx.edges.tolist()
        )
        assert cross_edges(cx, a, b) == expected
    assert not cross_edges(cx, [], [1])


def test_cross_edges_far_clusters():
    X = np.r_[np.random.default_rng(0).random((3, 2)), 50 + np.random.default_rng(1).random((3, 2))]
    cx = build_rips(naive_distances(X), 1.0)
    assert not cross_edges(cx, [0, 1, 2], [3, 4, 5])
    with pytest.raises(ValueError):
        cross_edges(cx, [0, 1], [1, 2])


def test_union_find():
    uf = UnionFind(5)
    assert uf.union(0, 1) and uf.union(3, 4) and uf.union(1, 4)
    assert not uf.union(0, 3)
    assert uf.find(0) == uf.find(4) and uf.find(2) != uf.find(0)


def test_shortest_path_metric_matches_floyd_warshall():
    D = naive_distances(np.random.default_rng(2).random((12, 2)))
    cx = build_rips(D, 0.15, max_dim=1)
    edges = [(i, j, D[i, j]) for i, j in cx.edges.tolist()]
    np.testing.assert_allclose(shortest_path_metric(cx), floyd_warshall(12, edges))


def test_shortest_path_keeps_zero_length_edges():
    D = np.array([[0, 0, 3.0], [0, 0, 1.0], [3.0, 1.0, 0]])
    cx = build_rips(D, 0.5, max_dim=1)
    G = shortest_path_metric(cx)
    assert G[0, 1] == 0.0 and G[0, 2] == 1.0
