"""Vietoris-Rips complexes (up to triangles) and connectivity queries.

Scale convention: an edge ``{i, j}`` belongs to the complex at scale ``r``
iff ``d(i, j) <= 2 * r``, and every simplex is valued at half its diameter.
Most TDA software uses the diameter itself; all values here are in these
"radius" units.
"""

from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import csgraph_from_dense, shortest_path

from ._validation import check_distance_matrix, check_scalar

__all__ = [
    "UnionFind",
    "RipsComplex",
    "ComponentLabeling",
    "build_rips",
    "connectivity_threshold",
    "connected_components",
    "cross_edges",
    "shortest_path_metric",
]


class UnionFind:
    """Disjoint sets over ``0..n-1`` with path halving and union by size."""

    def __init__(self, n):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, i):
        parent = self.parent
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(self, i, j):
        """Merge the sets of ``i`` and ``j``; return False if already joined."""
        ri, rj = self.find(i), self.find(j)
        if ri == rj:
            return False
        if self.size[ri] < self.size[rj]:
            ri, rj = rj, ri
        self.parent[rj] = ri
        self.size[ri] += self.size[rj]
        return True


@dataclass(frozen=True, eq=False)
class RipsComplex:
    """Vietoris-Rips complex at a fixed scale, truncated at dimension 2.

    Attributes
    ----------
    n_vertices : int
    edges : ndarray of shape (n_edges, 2)
        Sorted vertex pairs ``i < j``, in lexicographic order.
    edge_values : ndarray of shape (n_edges,)
        ``d(i, j) / 2``.
    triangles : ndarray of shape (n_triangles, 3)
        Sorted vertex triples, lexicographic order. Empty if built with
        ``max_dim=1``.
    triangle_values : ndarray of shape (n_triangles,)
        Half the largest side length.
    scale : float
    """

    n_vertices: int
    edges: np.ndarray
    edge_values: np.ndarray
    triangles: np.ndarray
    triangle_values: np.ndarray
    scale: float
    max_dim: int = 2

    @property
    def n_edges(self):
        return self.edges.shape[0]

    @property
    def n_triangles(self):
        return self.triangles.shape[0]

    def simplices(self):
        """All simplices as sorted vertex tuples, by dimension."""
        out = [(i,) for i in range(self.n_vertices)]
        out += [tuple(e) for e in self.edges.tolist()]
        out += [tuple(t) for t in self.triangles.tolist()]
        return out


@dataclass(frozen=True)
class ComponentLabeling:
    """Connected-component ids (``0..n_components-1``) for a vertex subset.

    ``labels[k]`` is the component of ``vertices[k]``. Ids are assigned in
    order of each component's smallest vertex.
    """

    vertices: np.ndarray
    labels: np.ndarray
    n_components: int

    def groups(self):
        """Member vertex arrays, one per component id."""
        return [self.vertices[self.labels == c] for c in range(self.n_components)]


def _edge_list(D, threshold):
    iu, ju = np.nonzero(np.triu(D <= threshold, 1))
    return np.column_stack([iu, ju]).astype(np.intp)


def _triangles(D, threshold):
    n = D.shape[0]
    A = np.triu(D <= threshold, 1)
    tris = []
    for i in range(n):
        nbrs = np.flatnonzero(A[i])
        if nbrs.size < 2:
            continue
        sub = A[np.ix_(nbrs, nbrs)]
        j, k = np.nonzero(sub)
        if j.size:
            tris.append(np.column_stack([np.full(j.size, i), nbrs[j], nbrs[k]]))
    if not tris:
        return np.empty((0, 3), dtype=np.intp)
    T = np.concatenate(tris).astype(np.intp)
    return T[np.lexsort((T[:, 2], T[:, 1], T[:, 0]))]


def build_rips(distances, r, max_dim=2):
    """Vietoris-Rips complex of ``distances`` at scale ``r``.

    Parameters
    ----------
    distances : array-like of shape (n, n)
    r : float
        Scale; edges are pairs at distance at most ``2 * r``.
    max_dim : {1, 2}
        Skip triangle enumeration with ``max_dim=1`` when only the 1-skeleton
        is needed.
    """
    D = check_distance_matrix(distances)
    r = check_scalar(r, "r", min_val=0.0)
    if max_dim not in (1, 2):
        raise ValueError("max_dim must be 1 or 2")
    threshold = 2.0 * r
    edges = _edge_list(D, threshold)
    edge_values = D[edges[:, 0], edges[:, 1]] / 2.0
    if max_dim == 2:
        tris = _triangles(D, threshold)
        tri_values = np.maximum.reduce(
            [D[tris[:, 0], tris[:, 1]], D[tris[:, 0], tris[:, 2]], D[tris[:, 1], tris[:, 2]]]
        ) / 2.0 if tris.size else np.empty(0)
    else:
        tris, tri_values = np.empty((0, 3), dtype=np.intp), np.empty(0)
    return RipsComplex(D.shape[0], edges, edge_values, tris, tri_values, r, max_dim)


def connectivity_threshold(distances):
    """Smallest scale at which the Rips 1-skeleton is connected.

    This is half the bottleneck (longest) edge of a minimum spanning tree.
    """
    D = check_distance_matrix(distances)
    n = D.shape[0]
    if n == 1:
        return 0.0
    in_tree = np.zeros(n, dtype=bool)
    best = D[0].copy()
    in_tree[0] = True
    bottleneck = 0.0
    for _ in range(n - 1):
        cand = np.where(in_tree, np.inf, best)
        v = int(np.argmin(cand))
        bottleneck = max(bottleneck, float(cand[v]))
        in_tree[v] = True
        np.minimum(best, D[v], out=best)
    return bottleneck / 2.0


def connected_components(complex, vertex_subset=None):
    """Components of the subcomplex induced on ``vertex_subset``.

    Only edges with both endpoints in the subset are used.
    """
    if vertex_subset is None:
        vertices = np.arange(complex.n_vertices)
    else:
        vertices = np.unique(np.asarray(vertex_subset, dtype=np.intp))
    if vertices.size == 0:
        raise ValueError("vertex subset is empty")
    if vertices[0] < 0 or vertices[-1] >= complex.n_vertices:
        raise ValueError("vertex subset out of range")
    local = np.full(complex.n_vertices, -1, dtype=np.intp)
    local[vertices] = np.arange(vertices.size)
    e = complex.edges
    inside = (local[e[:, 0]] >= 0) & (local[e[:, 1]] >= 0)
    uf = UnionFind(vertices.size)
    for a, b in local[e[inside]].tolist():
        uf.union(a, b)
    roots = [uf.find(k) for k in range(vertices.size)]
    ids = {}
    labels = np.empty(vertices.size, dtype=np.intp)
    for k, root in enumerate(roots):
        labels[k] = ids.setdefault(root, len(ids))
    return ComponentLabeling(vertices, labels, len(ids))


def cross_edges(complex, subset_a, subset_b):
    """True iff some edge of the complex joins ``subset_a`` to ``subset_b``."""
    a = np.unique(np.asarray(subset_a, dtype=np.intp))
    b = np.unique(np.asarray(subset_b, dtype=np.intp))
    if a.size == 0 or b.size == 0:
        return False
    if np.intersect1d(a, b).size:
        raise ValueError("subsets overlap")
    in_a = np.zeros(complex.n_vertices, dtype=bool)
    in_b = np.zeros(complex.n_vertices, dtype=bool)
    in_a[a] = True
    in_b[b] = True
    u, v = complex.edges[:, 0], complex.edges[:, 1]
    return bool(np.any((in_a[u] & in_b[v]) | (in_b[u] & in_a[v])))


def shortest_path_metric(complex):
    """All-pairs shortest paths on the 1-skeleton, edges weighted by length.

    Edge weights are diameters (``2 * value``), i.e. the input distances.
    Disconnected pairs are ``inf``.
    """
    n = complex.n_vertices
    W = np.full((n, n), np.inf)
    e = complex.edges
    W[e[:, 0], e[:, 1]] = W[e[:, 1], e[:, 0]] = 2.0 * complex.edge_values
    # null_value=inf keeps zero-length edges (duplicate points) as real edges
    return shortest_path(csgraph_from_dense(W, null_value=np.inf), directed=False)
