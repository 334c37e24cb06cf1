import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from decorated_reeb.diagrams import as_diagram
from decorated_reeb.experiments import ShapeSpec, sample_shape
from decorated_reeb.fgw import (
    FGWDistance,
    attribute_costs,
    barcode_loss,
    fgw_distance,
    fgw_objective,
    fgw_solve,
    fit_vectorizer,
    graph_loss,
    pairwise_fgw,
    pairwise_fgw_sweep,
    shortest_path_costs,
)
from decorated_reeb.reeb import DecoratedReebGraph, ReebGraphTransformer, ReebSkeleton
from decorated_reeb.transport import uniform_transport
from oracles import floyd_warshall, graph_loss_by_loops, linear_loss_by_loops, transport_cost_by_lp


def make_drg(f_mean, edges, diagrams=None, mode="local", name=""):
    n = len(f_mean)
    bins = np.arange(n, dtype=np.intp)
    sk = ReebSkeleton(
        bins,
        tuple(np.array([k]) for k in range(n)),
        np.asarray(f_mean, dtype=float),
        np.array(edges, dtype=np.intp).reshape(-1, 2),
        np.arange(n + 1, dtype=float),
        1.0,
    )
    if diagrams is None:
        diagrams = [as_diagram([(0.1 * k, 0.1 * k + 0.5)]) for k in range(n)]
    return DecoratedReebGraph(sk, tuple(diagrams), mode, {}, name)


def random_coupling(rng, n1, n2):
    # a random point of the transportation polytope: mix of vertex couplings
    w = rng.dirichlet(np.ones(3))
    return sum(wk * uniform_transport(rng.random((n1, n2))) for wk in w)


def random_metric(rng, n):
    X = rng.random((n, 2))
    return np.linalg.norm(X[:, None] - X[None], axis=-1)


def check_marginals(pi, tol=1e-8):
    n1, n2 = pi.shape
    assert np.all(pi >= -tol)
    assert np.abs(pi.sum(axis=1) - 1 / n1).max() <= tol
    assert np.abs(pi.sum(axis=0) - 1 / n2).max() <= tol


@pytest.fixture(scope="module")
def shape_drgs():
    specs = [ShapeSpec("torus", 120, seed=1), ShapeSpec("cylinder", 120, seed=2),
             ShapeSpec("torus", 120, seed=3)]
    est = ReebGraphTransformer(n_bins=5)
    return [est.build_one(sample_shape(s), name=f"s{k}") for k, s in enumerate(specs)]


# --- exact transport ---------------------------------------------------------

@pytest.mark.parametrize("shape", [(1, 1), (1, 4), (3, 3), (4, 6), (5, 7), (25, 27)])
def test_uniform_transport_is_optimal(shape):
    rng = np.random.default_rng(sum(shape))
    M = rng.random(shape)
    X = uniform_transport(M)
    check_marginals(X, 1e-12)
    assert np.sum(M * X) == pytest.approx(transport_cost_by_lp(M), abs=1e-9)


def test_uniform_transport_rejects_bad_costs():
    with pytest.raises(FloatingPointError):
        uniform_transport(np.array([[np.inf, 0.0]]))
    with pytest.raises(ValueError):
        uniform_transport(np.zeros((0, 3)))


# --- graph costs ---------------------------------------------------------------

def test_path_graph_costs():
    C = shortest_path_costs(make_drg([0, 1, 3], [(0, 1), (1, 2)])).matrix
    assert C[0, 2] == 3 and C[2, 0] == 3
    np.testing.assert_array_equal(shortest_path_costs(make_drg([2.0], [])).matrix, [[0.0]])


def test_costs_match_floyd_warshall():
    rng = np.random.default_rng(4)
    f = rng.random(15) * 5
    edges = sorted({tuple(sorted(e)) for e in rng.integers(0, 15, (30, 2)).tolist() if e[0] != e[1]})
    edges += [(k, k + 1) for k in range(14) if (k, k + 1) not in edges]
    C = shortest_path_costs(make_drg(f, edges)).matrix
    expected = floyd_warshall(15, [(u, v, abs(f[u] - f[v])) for u, v in edges])
    np.testing.assert_allclose(C, expected, atol=1e-12)
    assert np.array_equal(C, C.T) and np.all(np.diag(C) == 0)


def test_disconnected_pairs_are_filled():
    drg = make_drg([0, 1, 5, 7], [(0, 1), (2, 3)])
    C = shortest_path_costs(drg).matrix
    assert C[0, 2] == 10 * 2 and C[0, 1] == 1 and C[2, 3] == 2
    raw = shortest_path_costs(drg, fill_disconnected_pairs=False).matrix
    assert np.isinf(raw[0, 3])
    # no edges at all: finite max is 0, fill with 10
    assert shortest_path_costs(make_drg([0, 1], [])).matrix[0, 1] == 10.0


# --- losses -------------------------------------------------------------------

def test_graph_loss_examples():
    rng = np.random.default_rng(0)
    C = random_metric(rng, 5)
    assert graph_loss(np.eye(5) / 5, C, C) == pytest.approx(0.0, abs=1e-15)
    assert graph_loss(np.ones((1, 1)), np.zeros((1, 1)), np.zeros((1, 1))) == 0.0
    C1, C2 = random_metric(rng, 4), random_metric(rng, 5)
    pi = random_coupling(rng, 4, 5)
    assert graph_loss(pi, C1, C2) == pytest.approx(graph_loss_by_loops(pi, C1, C2), abs=1e-12)


def test_barcode_loss_examples():
    pi = np.full((3, 4), 1 / 12)
    assert barcode_loss(pi, np.zeros((3, 4))) == 0.0
    assert barcode_loss(pi, np.ones((3, 4))) == pytest.approx(1.0)
    M = np.random.default_rng(1).random((3, 4))
    assert barcode_loss(pi, M) == pytest.approx(linear_loss_by_loops(pi, M), abs=1e-14)
    with pytest.raises(ValueError):
        barcode_loss(pi, np.zeros((4, 3)))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_losses_match_loops(n1, n2, seed):
    rng = np.random.default_rng(seed)
    C1, C2 = random_metric(rng, n1), random_metric(rng, n2)
    M = rng.random((n1, n2))
    pi = random_coupling(rng, n1, n2)
    assert abs(graph_loss(pi, C1, C2) - graph_loss_by_loops(pi, C1, C2)) <= 1e-8
    assert abs(barcode_loss(pi, M) - linear_loss_by_loops(pi, M)) <= 1e-8
    # objective is affine in alpha for a fixed coupling
    f0, f1 = fgw_objective(pi, C1, C2, M, 0.0), fgw_objective(pi, C1, C2, M, 1.0)
    for a in (0.25, 0.5, 0.9):
        assert fgw_objective(pi, C1, C2, M, a) == pytest.approx((1 - a) * f0 + a * f1, abs=1e-12)


# --- solver -------------------------------------------------------------------

@settings(max_examples=40, deadline=None)
@given(st.integers(1, 7), st.integers(1, 7), st.sampled_from([0.0, 0.3, 0.5, 0.8, 1.0]),
       st.integers(0, 2**32 - 1))
def test_solver_iterates_feasible_and_monotone(n1, n2, alpha, seed):
    rng = np.random.default_rng(seed)
    C1, C2 = random_metric(rng, n1), random_metric(rng, n2)
    M = rng.random((n1, n2))
    res = fgw_solve(C1, C2, M, alpha, keep_iterates=True)
    assert len(res.iterates) == len(res.history)
    for pi in res.iterates:
        check_marginals(pi)
    assert all(b <= a for a, b in zip(res.history, res.history[1:]))
    # never worse than the product coupling or (equal sizes) the identity coupling
    product = np.full((n1, n2), 1 / (n1 * n2))
    assert res.value**2 <= fgw_objective(product, C1, C2, M, alpha) + 1e-12
    if n1 == n2:
        ident = fgw_solve(C1, C2, M, alpha, init=np.eye(n1) / n1)
        assert ident.objective <= fgw_objective(np.eye(n1) / n1, C1, C2, M, alpha) + 1e-12


@pytest.mark.parametrize("shape", [(3, 5), (6, 6), (8, 12)])
def test_alpha_zero_is_linear_transport(shape):
    rng = np.random.default_rng(shape[0])
    M = rng.random(shape)
    res = fgw_solve(random_metric(rng, shape[0]), random_metric(rng, shape[1]), M, 0.0)
    assert res.value**2 == pytest.approx(transport_cost_by_lp(M), abs=1e-6)


def test_single_node_graphs():
    z = np.zeros((1, 1))
    for alpha in (0.0, 0.4, 1.0):
        res = fgw_solve(z, z, np.array([[2.5]]), alpha)
        assert res.value**2 == pytest.approx((1 - alpha) * 2.5)


def test_alpha_one_is_gromov_wasserstein():
    rng = np.random.default_rng(7)
    C1, C2 = random_metric(rng, 4), random_metric(rng, 4)
    res = fgw_solve(C1, C2, rng.random((4, 4)), 1.0)
    assert res.objective == pytest.approx(graph_loss(res.coupling, C1, C2), abs=1e-12)
    # a permuted copy is found at GW distance zero
    perm = rng.permutation(4)
    best = min(
        fgw_solve(C1, C1[np.ix_(perm, perm)], np.zeros((4, 4)), 1.0, init=P).objective
        for P in (None, np.eye(4)[perm].T / 4)
    )
    assert best <= 1e-12


def test_solver_argument_checks():
    C = np.zeros((2, 2))
    with pytest.raises(ValueError):
        fgw_solve(C, C, np.zeros((2, 3)), 0.5)
    with pytest.raises(ValueError):
        fgw_solve(C, C, np.zeros((2, 2)), 1.5)
    with pytest.raises(ValueError):
        fgw_solve(C, C, np.zeros((2, 2)), 0.5, init=np.ones((3, 2)))


# --- DRG-level distance ----------------------------------------------------------

@pytest.mark.parametrize("attr_mode", ["image", "stats", "bottleneck"])
def test_identical_drgs_are_at_zero(shape_drgs, attr_mode):
    g = shape_drgs[0]
    for alpha in (0.0, 0.5, 1.0):
        value, pi = fgw_distance(g, g, alpha, attr_mode)
        assert value <= 1e-6
        check_marginals(pi)


def test_alpha_zero_matches_lp_on_drgs(shape_drgs):
    a, b = shape_drgs[:2]
    vec = fit_vectorizer(shape_drgs, "image")
    M = attribute_costs(a, b, "image", vec)
    value, _ = fgw_distance(a, b, 0.0, "image", vectorizer=vec)
    assert value**2 == pytest.approx(transport_cost_by_lp(M), abs=1e-6)


def test_relabeling_invariance():
    rng = np.random.default_rng(3)
    f = np.array([0.0, 1.0, 1.2, 2.0, 3.1, 3.3])
    edges = [(0, 1), (0, 2), (1, 3), (2, 3), (3, 4), (3, 5)]
    diagrams = [as_diagram([(0.0, 0.2 * k + 0.1)]) for k in range(6)]
    g = make_drg(f, edges, diagrams)
    other = make_drg([0.0, 0.9, 2.2, 2.9], [(0, 1), (1, 2), (2, 3)], diagrams[:4])
    perm = rng.permutation(6)
    inv = np.argsort(perm)
    g_perm = make_drg(f[perm], [(inv[u], inv[v]) for u, v in edges], [diagrams[k] for k in perm])
    vec = fit_vectorizer([g, other], "image")
    for alpha in (0.0, 0.5, 1.0):
        for n_init in (1, 4):
            a, pa = fgw_distance(g, other, alpha, vectorizer=vec, n_init=n_init)
            b, pb = fgw_distance(g_perm, other, alpha, vectorizer=vec, n_init=n_init)
            assert abs(a - b) < 1e-6
            # the optimal coupling permutes along with the nodes
            np.testing.assert_allclose(pb, pa[perm], atol=1e-12)


def test_alpha_zero_ignores_graph_structure(shape_drgs):
    a, b = shape_drgs[:2]
    rewired = DecoratedReebGraph(
        ReebSkeleton(a.skeleton.bins, a.skeleton.members, a.skeleton.f_mean,
                     np.array([[0, 1]]), a.skeleton.bin_edges, a.skeleton.scale),
        a.diagrams, a.mode, a.params, a.name,
    )
    vec = fit_vectorizer([a, b], "image")
    v1 = fgw_distance(a, b, 0.0, vectorizer=vec)[0]
    v2 = fgw_distance(rewired, b, 0.0, vectorizer=vec)[0]
    assert abs(v1 - v2) <= 1e-9


def test_pairwise_matrix_and_multistart(shape_drgs):
    D = pairwise_fgw(shape_drgs, 0.5)
    assert np.array_equal(D, D.T) and np.all(np.diag(D) == 0) and np.all(D >= 0)
    D6 = pairwise_fgw(shape_drgs, 0.5, n_init=6, random_state=11)
    # the default starts are among the multistart starts, so it can only improve;
    # the problem is nonconvex, so it may improve by more than solver tolerance
    assert np.all(D6 <= D + 1e-12)
    np.testing.assert_allclose(D, D6, rtol=0.02)


def test_pairwise_of_identical_pair(shape_drgs):
    g = shape_drgs[0]
    D = pairwise_fgw([g, g], 0.5)
    assert D[0, 1] <= 1e-6


def test_sweep_matches_single_alpha(shape_drgs):
    vec = fit_vectorizer(shape_drgs, "image")
    mats = pairwise_fgw_sweep(shape_drgs, [0.0, 0.5], vectorizer=vec)
    np.testing.assert_array_equal(mats[1], pairwise_fgw(shape_drgs, 0.5, vectorizer=vec))
    assert len(mats) == 2


def test_parallel_sweep_matches_serial(shape_drgs):
    vec = fit_vectorizer(shape_drgs, "image")
    a = pairwise_fgw_sweep(shape_drgs, [0.5], vectorizer=vec)[0]
    b = pairwise_fgw_sweep(shape_drgs, [0.5], vectorizer=vec, n_jobs=2)[0]
    np.testing.assert_array_equal(a, b)


def test_incompatible_drgs_rejected(shape_drgs):
    g = shape_drgs[0]
    other = DecoratedReebGraph(g.skeleton, g.diagrams, "barcode-transform", g.params, "x")
    with pytest.raises(ValueError, match="modes"):
        fgw_distance(g, other)
    deg0 = DecoratedReebGraph(g.skeleton, tuple(as_diagram([], 0) for _ in g.diagrams), "local")
    with pytest.raises(ValueError, match="degrees"):
        pairwise_fgw([g, deg0])


def test_estimator(shape_drgs):
    est = FGWDistance(alpha=0.5)
    D = est.fit_transform(shape_drgs)
    np.testing.assert_array_equal(D, pairwise_fgw(shape_drgs, 0.5, vectorizer=est.vectorizer_))
    assert est.distance(shape_drgs[0], shape_drgs[1]) == pytest.approx(D[0, 1], abs=1e-12)
    assert est.get_params()["attr_mode"] == "image"


def test_bottleneck_costs_are_squared(shape_drgs):
    from decorated_reeb.diagrams import bottleneck_distance

    a, b = shape_drgs[:2]
    cap = fit_vectorizer([a, b], "bottleneck")
    M = attribute_costs(a, b, "bottleneck", cap)
    for i, j in itertools.product(range(2), range(2)):
        assert M[i, j] == bottleneck_distance(a.diagrams[i], b.diagrams[j], cap) ** 2
