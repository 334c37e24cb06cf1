import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.spatial.transform import Rotation

from decorated_reeb.geometry import (
    FilterValues,
    PointCloud,
    coordinate_filter,
    eccentricity_filter,
    pairwise_distances,
    pca_filter,
)
from oracles import naive_distances

clouds = arrays(
    np.float64,
    st.tuples(st.integers(1, 12), st.integers(1, 4)),
    elements=st.floats(-100, 100, allow_nan=False, width=32),
)


def test_three_four_five():
    D = pairwise_distances(PointCloud(points=[[0, 0], [3, 4]]))
    assert D[0, 1] == 5.0 and D[1, 0] == 5.0


def test_single_point_distance_matrix():
    D = pairwise_distances(PointCloud(points=[[1.0, 2.0]]))
    assert D.shape == (1, 1) and D[0, 0] == 0.0


def test_distances_match_double_loop():
    X = np.random.default_rng(3).normal(size=(5, 3))
    np.testing.assert_allclose(pairwise_distances(PointCloud(points=X)), naive_distances(X), atol=1e-12)


def test_empty_cloud_rejected():
    with pytest.raises(ValueError):
        PointCloud(points=np.empty((0, 2)))
    with pytest.raises(ValueError):
        PointCloud()


def test_explicit_metric_takes_precedence():
    D = np.array([[0, 7.0], [7.0, 0]])
    cloud = PointCloud(points=[[0, 0], [1, 0]], distances=D)
    np.testing.assert_array_equal(cloud.distance_matrix(), D)


@pytest.mark.parametrize("D", [
    [[0, 1], [2, 0]],
    [[1, 1], [1, 0]],
    [[0, -1], [-1, 0]],
    [[0, np.nan], [np.nan, 0]],
    [[0, 1, 2], [1, 0, 3]],
])
def test_invalid_distance_matrices(D):
    with pytest.raises(ValueError):
        PointCloud(distances=np.array(D, dtype=float))


def test_cloud_arrays_are_read_only():
    cloud = PointCloud(points=np.zeros((3, 2)))
    with pytest.raises(ValueError):
        cloud.points[0, 0] = 1.0


@settings(max_examples=60, deadline=None)
@given(clouds)
def test_distance_matrix_is_a_metric(X):
    D = pairwise_distances(PointCloud(points=X))
    scale = max(1.0, float(np.abs(X).max()))
    assert np.array_equal(D, D.T)
    assert np.all(np.diag(D) == 0) and np.all(D >= 0)
    # triangle inequality over all triples
    assert np.all(D[:, None, :] <= D[:, :, None] + D[None, :, :] + 1e-9 * scale)


def test_coordinate_filter():
    cloud = PointCloud(points=[[1.0, 2.0, 3.0]])
    assert coordinate_filter(cloud, 2).values[0] == 3.0
    X = np.random.default_rng(0).normal(size=(6, 2))
    fv = coordinate_filter(PointCloud(points=X), 0)
    np.testing.assert_array_equal(fv.values, X[:, 0])
    assert fv.provenance == "coordinate-0"
    with pytest.raises(ValueError):
        coordinate_filter(PointCloud(points=X), 2)


def test_coordinate_filter_on_circle_stays_in_range():
    t = np.random.default_rng(1).uniform(0, 2 * np.pi, 50)
    fv = coordinate_filter(PointCloud(points=np.c_[np.cos(t), np.sin(t)]), 1)
    assert np.all(fv.values >= -1) and np.all(fv.values <= 1)


def test_filter_values_validation():
    with pytest.raises(ValueError):
        FilterValues([0.0, np.inf])


def test_pca_on_collinear_points_is_signed_position():
    s = np.array([-2.0, -0.5, 0.0, 1.0, 4.0])
    X = np.outer(s, [1.0, 1.0]) / np.sqrt(2) + [3.0, -1.0]
    f = pca_filter(PointCloud(points=X), 0).values
    expected = s - s.mean()
    assert np.allclose(f, expected, atol=1e-9) or np.allclose(f, -expected, atol=1e-9)


def test_pca_on_axis_aligned_cloud():
    rng = np.random.default_rng(4)
    X = np.c_[rng.normal(scale=2.0, size=400), rng.normal(scale=1.0, size=400)]
    # eigen-oracle: the covariance eigenvector with the largest eigenvalue
    w, V = np.linalg.eigh(np.cov(X.T))
    expected = (X - X.mean(axis=0)) @ V[:, np.argmax(w)]
    f = pca_filter(PointCloud(points=X), 0).values
    assert np.allclose(f, expected) or np.allclose(f, -expected)
    assert abs(abs(np.corrcoef(f, X[:, 0])[0, 1]) - 1) < 0.05


def test_pca_degenerate_cloud():
    with pytest.raises(ValueError):
        pca_filter(PointCloud(points=np.ones((5, 3))), 0)


def test_pca_needs_coordinates():
    with pytest.raises(ValueError):
        pca_filter(PointCloud(distances=np.zeros((2, 2))), 0)


def test_pca_rotation_invariant_up_to_sign():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(60, 3)) * [3.0, 1.5, 0.5]
    Q = Rotation.random(random_state=7).as_matrix()
    a = pca_filter(PointCloud(points=X), 0).values
    b = pca_filter(PointCloud(points=X @ Q.T), 0).values
    assert min(np.abs(a - b).max(), np.abs(a + b).max()) < 1e-6


def test_eccentricity_two_points():
    D = np.array([[0, 2.0], [2.0, 0]])
    np.testing.assert_allclose(eccentricity_filter(D, 1).values, [1.0, 1.0])


def test_eccentricity_large_p_approaches_row_max():
    rng = np.random.default_rng(6)
    D = naive_distances(rng.normal(size=(10, 2)) * 50)
    rmax = D.max(axis=1)
    # the uniform-measure mean sits between max * n**(-1/p) and max
    f = eccentricity_filter(D, 100).values
    assert np.all(f <= rmax * (1 + 1e-12))
    assert np.all(f >= rmax * 10 ** (-1 / 100) * (1 - 1e-12))
    assert np.all(f >= 0.97 * rmax)
    f = eccentricity_filter(D, 10_000).values
    assert np.all(np.abs(f - rmax) <= 0.01 * rmax)


def test_eccentricity_identical_points():
    assert np.all(eccentricity_filter(np.zeros((4, 4)), 100).values == 0)


@settings(max_examples=30, deadline=None)
@given(clouds.filter(lambda X: X.shape[0] >= 2), st.randoms(use_true_random=False))
def test_eccentricity_permutation_equivariant(X, rnd):
    perm = list(range(X.shape[0]))
    rnd.shuffle(perm)
    D = naive_distances(X)
    f = eccentricity_filter(D, 100).values
    g = eccentricity_filter(D[np.ix_(perm, perm)], 100).values
    np.testing.assert_allclose(g, f[perm], rtol=1e-12, atol=0)
