"""Reeb graph estimation for filtered point clouds and node decorations."""

from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed
from sklearn.base import BaseEstimator, TransformerMixin

from ._validation import check_scalar
from .complex import (
    build_rips,
    connected_components,
    connectivity_threshold,
    shortest_path_metric,
)
from .geometry import (
    FilterValues,
    PointCloud,
    coordinate_filter,
    eccentricity_filter,
    pca_filter,
)
from .persistence import (
    PersistenceDiagram,
    compute_persistence,
    distance_to_set_filtration,
    rips_filtration,
)

__all__ = [
    "ReebSkeleton",
    "DecoratedReebGraph",
    "estimate_reeb",
    "choose_scale",
    "decorate_local",
    "decorate_barcode_transform",
    "make_filter",
    "ReebGraphTransformer",
]

MODES = ("local", "barcode-transform")


@dataclass(frozen=True, eq=False)
class ReebSkeleton:
    """Mapper-style estimate of a Reeb graph.

    Node ``v`` is a connected component ``members[v]`` of the points whose
    filter value falls in bin ``bins[v]``. Nodes are ordered by bin, then by
    smallest member index. Edges ``(u, v)`` with ``u < v`` join nodes of
    consecutive bins whose members share a Rips edge.
    """

    bins: np.ndarray
    members: tuple
    f_mean: np.ndarray
    edges: np.ndarray
    bin_edges: np.ndarray
    scale: float
    centroids: np.ndarray | None = None

    @property
    def n_nodes(self):
        return self.bins.shape[0]

    @property
    def n_edges(self):
        return self.edges.shape[0]

    @property
    def n_points(self):
        return int(sum(m.size for m in self.members))

    def n_components(self):
        from .complex import UnionFind

        uf = UnionFind(self.n_nodes)
        for u, v in self.edges.tolist():
            uf.union(u, v)
        return len({uf.find(k) for k in range(self.n_nodes)})

    def betti_1(self):
        """Number of independent cycles, ``E - V + components``."""
        return self.n_edges - self.n_nodes + self.n_components()

    def node_of_point(self):
        out = np.empty(self.n_points, dtype=np.intp)
        for v, m in enumerate(self.members):
            out[m] = v
        return out


@dataclass(frozen=True, eq=False)
class DecoratedReebGraph:
    """Reeb skeleton whose nodes carry persistence diagrams.

    Attributes
    ----------
    skeleton : ReebSkeleton
    diagrams : tuple of PersistenceDiagram
        One per node.
    mode : {"local", "barcode-transform"}
    params : dict
        Construction parameters (``r``, ``m``, ``n_bins``, ``degree``,
        ``filter``, ...).
    name : str
    """

    skeleton: ReebSkeleton
    diagrams: tuple
    mode: str
    params: dict = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown decoration mode {self.mode!r}")
        if len(self.diagrams) != self.skeleton.n_nodes:
            raise ValueError("need exactly one diagram per node")
        object.__setattr__(self, "diagrams", tuple(self.diagrams))

    @property
    def n_nodes(self):
        return self.skeleton.n_nodes

    @property
    def degree(self):
        return self.diagrams[0].degree if self.diagrams else self.params.get("degree")


def _distances(cloud):
    return cloud.distance_matrix() if isinstance(cloud, PointCloud) else np.asarray(cloud, float)


def _bin_index(values, n_bins):
    lo, hi = float(values.min()), float(values.max())
    if hi <= lo:
        return np.zeros(values.size, dtype=np.intp), np.array([lo, hi]), 1
    width = (hi - lo) / n_bins
    idx = np.floor((values - lo) / width).astype(np.intp)
    np.clip(idx, 0, n_bins - 1, out=idx)
    return idx, lo + width * np.arange(n_bins + 1), n_bins


def estimate_reeb(cloud, filter_values, r, n_bins, complex=None):
    """Estimate the Reeb graph of ``(VR(X, r), f)``.

    The filter range is split into ``n_bins`` equal half-open intervals (the
    last one closed). Nodes are the Rips components inside each bin, and
    nodes of consecutive bins are joined when a Rips edge connects them.

    Parameters
    ----------
    cloud : PointCloud
    filter_values : FilterValues or array-like
    r : float
        Rips scale (radius units).
    n_bins : int
    complex : RipsComplex, optional
        A prebuilt complex at scale ``r``; only its 1-skeleton is used.
    """
    if not isinstance(cloud, PointCloud):
        cloud = PointCloud(points=cloud)
    f = filter_values.values if isinstance(filter_values, FilterValues) else np.asarray(filter_values, float)
    if f.shape != (cloud.size,):
        raise ValueError(f"filter has {f.size} values for {cloud.size} points")
    r = check_scalar(r, "r", min_val=0.0, include_min=False)
    n_bins = check_scalar(n_bins, "n_bins", min_val=1, integer=True)
    if complex is None:
        complex = build_rips(cloud.distance_matrix(), r, max_dim=1)
    elif complex.n_vertices != cloud.size:
        raise ValueError("complex does not match the cloud")

    bin_of, bin_edges, n_eff = _bin_index(f, n_bins)
    bins, members = [], []
    for i in range(n_eff):
        idx = np.flatnonzero(bin_of == i)
        if idx.size == 0:
            continue
        for group in connected_components(complex, idx).groups():
            bins.append(i)
            members.append(group)
    node_of = np.empty(cloud.size, dtype=np.intp)
    for v, m in enumerate(members):
        node_of[m] = v

    a, b = complex.edges[:, 0], complex.edges[:, 1]
    consecutive = np.abs(bin_of[a] - bin_of[b]) == 1
    pairs = np.sort(np.column_stack([node_of[a[consecutive]], node_of[b[consecutive]]]), axis=1)
    edges = np.unique(pairs, axis=0) if pairs.size else np.empty((0, 2), dtype=np.intp)

    f_mean = np.array([f[m].mean() for m in members])
    centroids = None
    if cloud.points is not None:
        centroids = np.array([cloud.points[m].mean(axis=0) for m in members])
    return ReebSkeleton(
        np.asarray(bins, dtype=np.intp),
        tuple(members),
        f_mean,
        edges.astype(np.intp),
        bin_edges,
        r,
        centroids,
    )


def choose_scale(distances, m=2):
    """``m`` times the smallest scale at which the Rips complex is connected."""
    m = check_scalar(m, "m", min_val=1.0)
    return m * connectivity_threshold(distances)


def _local_diagram(D, members, r_max, degree):
    sub = D[np.ix_(members, members)]
    return compute_persistence(rips_filtration(sub, r_max), degree)


def decorate_local(skeleton, cloud, degree=1, r_max=None, n_jobs=None, params=None, name=""):
    """Attach the Rips persistence diagram of each node's member set.

    The node filtrations are truncated at ``r_max`` (default: the skeleton's
    construction scale).
    """
    degree = check_scalar(degree, "degree", min_val=0, integer=True)
    D = _distances(cloud)
    r_max = skeleton.scale if r_max is None else r_max
    if n_jobs in (None, 1):
        diagrams = [_local_diagram(D, m, r_max, degree) for m in skeleton.members]
    else:
        diagrams = Parallel(n_jobs=n_jobs)(
            delayed(_local_diagram)(D, m, r_max, degree) for m in skeleton.members
        )
    p = {"r": skeleton.scale, "degree": degree, "r_max": float(r_max)}
    p.update(params or {})
    return DecoratedReebGraph(skeleton, tuple(diagrams), "local", p, name)


def _transform_diagram(complex, members, D, degree):
    return compute_persistence(distance_to_set_filtration(complex, members, D), degree)


def decorate_barcode_transform(skeleton, complex, distances, degree=1, n_jobs=None, params=None, name=""):
    """Attach to each node the diagram of the distance-to-node filtration.

    Every node filters the same full complex ``VR(X, r)`` by distance to its
    member set, so the diagrams record global topology as seen from the node.
    """
    degree = check_scalar(degree, "degree", min_val=0, integer=True)
    if complex.max_dim < 2:
        raise ValueError("barcode-transform decoration needs a complex with triangles")
    if not np.isclose(complex.scale, skeleton.scale):
        raise ValueError("complex and skeleton were built at different scales")
    D = np.asarray(distances, dtype=float)
    if n_jobs in (None, 1):
        diagrams = [_transform_diagram(complex, m, D, degree) for m in skeleton.members]
    else:
        diagrams = Parallel(n_jobs=n_jobs)(
            delayed(_transform_diagram)(complex, m, D, degree) for m in skeleton.members
        )
    p = {"r": skeleton.scale, "degree": degree}
    p.update(params or {})
    return DecoratedReebGraph(skeleton, tuple(diagrams), "barcode-transform", p, name)


FILTERS = ("pca", "coordinate", "eccentricity", "graph-eccentricity")


def make_filter(cloud, kind="pca", component=0, p=100.0, r=None):
    """Build one of the supported filter functions for ``cloud``.

    ``"graph-eccentricity"`` uses the shortest-path metric of the Rips
    1-skeleton at scale ``r``.
    """
    if kind == "pca":
        return pca_filter(cloud, component)
    if kind == "coordinate":
        return coordinate_filter(cloud, component)
    if kind == "eccentricity":
        return eccentricity_filter(cloud.distance_matrix(), p)
    if kind == "graph-eccentricity":
        if r is None:
            raise ValueError("graph-eccentricity needs the Rips scale r")
        G = shortest_path_metric(build_rips(cloud.distance_matrix(), r, max_dim=1))
        if not np.all(np.isfinite(G)):
            raise ValueError("Rips 1-skeleton is disconnected at this scale")
        fv = eccentricity_filter(G, p)
        return FilterValues(fv.values, f"graph-{fv.provenance}")
    raise ValueError(f"unknown filter {kind!r}; expected one of {FILTERS}")


class ReebGraphTransformer(BaseEstimator, TransformerMixin):
    """Turn point clouds into decorated Reeb graphs.

    The scale is ``m`` times the connectivity threshold of each cloud, the
    filter range is cut into ``n_bins`` bins, and nodes are decorated by the
    ``decoration`` approach.

    Parameters
    ----------
    filter : {"pca", "coordinate", "eccentricity", "graph-eccentricity"}
    component : int, default=0
        PCA component or coordinate axis.
    p : float, default=100
        Eccentricity exponent.
    m : float, default=2
    n_bins : int, default=10
    degree : int, default=1
    decoration : {"local", "barcode-transform"}
    n_jobs : int or None
        Workers for the per-node persistence computations.
    """

    def __init__(
        self,
        filter="pca",
        component=0,
        p=100.0,
        m=2,
        n_bins=10,
        degree=1,
        decoration="local",
        n_jobs=None,
    ):
        self.filter = filter
        self.component = component
        self.p = p
        self.m = m
        self.n_bins = n_bins
        self.degree = degree
        self.decoration = decoration
        self.n_jobs = n_jobs

    def _validate(self):
        if self.filter not in FILTERS:
            raise ValueError(f"unknown filter {self.filter!r}")
        if self.decoration not in MODES:
            raise ValueError(f"unknown decoration {self.decoration!r}")
        check_scalar(self.m, "m", min_val=1.0)
        check_scalar(self.n_bins, "n_bins", min_val=1, integer=True)
        check_scalar(self.degree, "degree", min_val=0, integer=True)

    def fit(self, X=None, y=None):
        self._validate()
        return self

    def build_one(self, cloud, name=""):
        self._validate()
        if not isinstance(cloud, PointCloud):
            cloud = PointCloud(points=cloud)
        D = cloud.distance_matrix()
        r = choose_scale(D, self.m)
        if r <= 0:
            raise ValueError("cloud has zero connectivity scale (all points coincide)")
        fv = make_filter(cloud, self.filter, self.component, self.p, r)
        max_dim = 2 if self.decoration == "barcode-transform" else 1
        cx = build_rips(D, r, max_dim=max_dim)
        sk = estimate_reeb(cloud, fv, r, self.n_bins, complex=cx)
        params = {"m": self.m, "n_bins": self.n_bins, "filter": fv.provenance}
        if self.decoration == "local":
            return decorate_local(sk, D, self.degree, n_jobs=self.n_jobs, params=params, name=name)
        return decorate_barcode_transform(
            sk, cx, D, self.degree, n_jobs=self.n_jobs, params=params, name=name
        )

    def transform(self, X):
        return [self.build_one(c) for c in X]
