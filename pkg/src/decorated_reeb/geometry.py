"""Point clouds, pairwise distances and scalar filter functions."""

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from ._validation import check_distance_matrix, check_points, check_scalar

__all__ = [
    "PointCloud",
    "FilterValues",
    "pairwise_distances",
    "coordinate_filter",
    "pca_filter",
    "eccentricity_filter",
]


@dataclass(frozen=True, eq=False)
class PointCloud:
    """A finite metric space.

    Parameters
    ----------
    points : array-like of shape (n_points, n_dims) or None
        Coordinates. May be omitted when ``distances`` is given.
    distances : array-like of shape (n_points, n_points) or None
        Explicit metric. When present it takes precedence over the Euclidean
        metric on ``points`` (e.g. a graph shortest-path metric).
    """

    points: np.ndarray | None = None
    distances: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.points is None and self.distances is None:
            raise ValueError("PointCloud needs coordinates or a distance matrix")
        if self.points is not None:
            pts = check_points(self.points)
            pts.setflags(write=False)
            object.__setattr__(self, "points", pts)
        if self.distances is not None:
            D = check_distance_matrix(self.distances)
            if self.points is not None and D.shape[0] != self.points.shape[0]:
                raise ValueError(
                    f"distance matrix is {D.shape[0]}x{D.shape[0]} but cloud "
                    f"has {self.points.shape[0]} points"
                )
            D.setflags(write=False)
            object.__setattr__(self, "distances", D)

    @property
    def size(self):
        if self.points is not None:
            return self.points.shape[0]
        return self.distances.shape[0]

    @property
    def dim(self):
        return None if self.points is None else self.points.shape[1]

    def __len__(self):
        return self.size

    def distance_matrix(self):
        """The explicit metric if given, otherwise Euclidean distances."""
        if self.distances is not None:
            return self.distances
        return pairwise_distances(self)


@dataclass(frozen=True, eq=False)
class FilterValues:
    """One real value per point, tagged with how it was produced.

    ``provenance`` is one of ``"coordinate-<k>"``, ``"pca-<k>"``,
    ``"eccentricity-<p>"`` or ``"external"``.
    """

    values: np.ndarray
    provenance: str = "external"

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64).ravel()
        if v.size == 0:
            raise ValueError("filter has no values")
        if not np.all(np.isfinite(v)):
            raise ValueError("filter values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.shape[0]


def _as_cloud(cloud):
    return cloud if isinstance(cloud, PointCloud) else PointCloud(points=cloud)


def pairwise_distances(cloud):
    """Euclidean distance matrix of the cloud's coordinates."""
    cloud = _as_cloud(cloud)
    if cloud.points is None:
        raise ValueError("cloud has no coordinates")
    X = cloud.points
    sq = np.einsum("ij,ij->i", X, X)
    D2 = sq[:, None] + sq[None, :] - 2.0 * (X @ X.T)
    np.maximum(D2, 0.0, out=D2)
    D = np.sqrt(D2)
    # the Gram trick loses precision for near-duplicate points; recompute those
    close = D < 1e-4 * max(1.0, float(np.sqrt(sq.max())))
    close[np.diag_indices_from(close)] = False
    if np.any(close):
        i, j = np.nonzero(close)
        D[i, j] = np.linalg.norm(X[i] - X[j], axis=1)
    np.fill_diagonal(D, 0.0)
    D = np.triu(D, 1)
    return D + D.T


def coordinate_filter(cloud, axis):
    """Filter by a single coordinate, e.g. height along z (``axis=2``)."""
    cloud = _as_cloud(cloud)
    if cloud.points is None:
        raise ValueError("cloud has no coordinates")
    axis = check_scalar(axis, "axis", min_val=0, integer=True)
    if axis >= cloud.dim:
        raise ValueError(f"axis {axis} out of range for {cloud.dim}-D cloud")
    return FilterValues(cloud.points[:, axis].copy(), f"coordinate-{axis}")


def pca_filter(cloud, component=0, tol=1e-12):
    """Project the centered cloud onto one principal axis.

    The axis is oriented so that its first nonzero loading is positive, which
    makes the output deterministic.

    Raises
    ------
    ValueError
        If the requested component has (numerically) zero variance.
    """
    cloud = _as_cloud(cloud)
    if cloud.points is None:
        raise ValueError("cloud has no coordinates")
    if cloud.size < 2:
        raise ValueError("pca_filter needs at least 2 points")
    component = check_scalar(component, "component", min_val=0, integer=True)
    if component >= cloud.dim:
        raise ValueError(f"component {component} out of range for {cloud.dim}-D cloud")
    X = cloud.points - cloud.points.mean(axis=0)
    cov = X.T @ X / cloud.size
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(evals)[::-1]
    evals, evecs = evals[order], evecs[:, order]
    scale = max(1.0, float(np.abs(cloud.points).max()) ** 2)
    if evals[component] <= tol * scale:
        raise ValueError(
            f"degenerate covariance: principal component {component} has "
            f"variance {evals[component]:.3g}"
        )
    axis = evecs[:, component]
    nz = np.flatnonzero(np.abs(axis) > 1e-12)
    if axis[nz[0]] < 0:
        axis = -axis
    return FilterValues(X @ axis, f"pca-{component}")


def eccentricity_filter(distances, p=100.0):
    """p-eccentricity ``((1/n) sum_j d(i, j)**p) ** (1/p)`` of every point.

    Evaluated in log space so that large ``p`` does not overflow.
    """
    D = check_distance_matrix(distances)
    p = check_scalar(p, "p", min_val=1.0)
    n = D.shape[0]
    with np.errstate(divide="ignore"):
        logD = np.log(D)
    log_mean = logsumexp(p * logD, axis=1) - np.log(n)
    values = np.exp(log_mean / p)
    return FilterValues(values, f"eccentricity-{p:g}")
