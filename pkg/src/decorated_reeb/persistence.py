"""Persistent homology (degrees 0 and 1, GF(2)) of filtered 2-complexes."""

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from ._validation import check_distance_matrix, check_scalar
from .complex import RipsComplex, UnionFind, build_rips

__all__ = [
    "PersistenceDiagram",
    "Filtration",
    "rips_filtration",
    "distance_to_set_filtration",
    "compute_persistence",
    "total_persistence",
    "RipsPersistence",
]


@dataclass(frozen=True, eq=False)
class PersistenceDiagram:
    """Multiset of ``(birth, death)`` pairs in one homology degree.

    ``pairs`` is kept sorted by ``(birth, death)``; essential classes have
    ``death == inf``.
    """

    degree: int
    pairs: np.ndarray

    def __post_init__(self):
        P = np.asarray(self.pairs, dtype=np.float64).reshape(-1, 2)
        if np.any(np.isnan(P)) or np.any(np.isinf(P[:, 0])):
            raise ValueError("births must be finite and no value may be NaN")
        if np.any(P[:, 1] < P[:, 0]):
            raise ValueError("every pair needs birth <= death")
        P = P[np.lexsort((P[:, 1], P[:, 0]))]
        P.setflags(write=False)
        object.__setattr__(self, "pairs", P)

    def __len__(self):
        return self.pairs.shape[0]

    def __eq__(self, other):
        if not isinstance(other, PersistenceDiagram):
            return NotImplemented
        return self.degree == other.degree and np.array_equal(self.pairs, other.pairs)

    @property
    def births(self):
        return self.pairs[:, 0]

    @property
    def deaths(self):
        return self.pairs[:, 1]

    @property
    def n_essential(self):
        return int(np.sum(np.isinf(self.pairs[:, 1])))

    def max_finite_value(self):
        """Largest finite birth or death, or ``0.0`` for an empty diagram."""
        P = self.pairs[np.isfinite(self.pairs)]
        return float(P.max()) if P.size else 0.0

    def capped(self, cap):
        """Pairs with deaths clipped to ``cap``."""
        P = self.pairs.copy()
        P[:, 1] = np.minimum(P[:, 1], cap)
        return P


@dataclass(frozen=True, eq=False)
class Filtration:
    """A filtered simplicial complex of dimension at most 2.

    Simplices of each dimension are stored sorted by ``(value, vertices)``.
    The global order (:meth:`simplices`) sorts by value, then dimension, then
    lexicographically, so faces always precede cofaces.
    """

    vertex_values: np.ndarray
    edges: np.ndarray
    edge_values: np.ndarray
    triangles: np.ndarray
    triangle_values: np.ndarray

    @property
    def n_vertices(self):
        return self.vertex_values.shape[0]

    def __len__(self):
        return self.n_vertices + self.edges.shape[0] + self.triangles.shape[0]

    def simplices(self):
        """List of ``(simplex, value)`` in filtration order."""
        simp = [(i,) for i in range(self.n_vertices)]
        simp += [tuple(e) for e in self.edges.tolist()]
        simp += [tuple(t) for t in self.triangles.tolist()]
        vals = np.concatenate([self.vertex_values, self.edge_values, self.triangle_values])
        dims = np.repeat([0, 1, 2], [self.n_vertices, self.edges.shape[0], self.triangles.shape[0]])
        verts = sorted(range(len(simp)), key=lambda k: simp[k])
        lex = np.empty(len(simp), dtype=np.intp)
        lex[verts] = np.arange(len(simp))
        order = np.lexsort((lex, dims, vals))
        return [(simp[k], float(vals[k])) for k in order]

    @classmethod
    def from_simplices(cls, simplices, values):
        """Build from an arbitrary list of simplices and their values.

        Raises ``ValueError`` unless the list is closed under faces, has
        dimension at most 2, and assigns faces values no larger than cofaces.
        """
        by_simplex = {}
        for s, v in zip(simplices, values):
            s = tuple(sorted(int(x) for x in s))
            if not 1 <= len(s) <= 3:
                raise ValueError(f"unsupported simplex {s}")
            by_simplex[s] = float(v)
        n = 1 + max((s[-1] for s in by_simplex), default=-1)
        vv = np.full(n, np.nan)
        for s, v in by_simplex.items():
            if len(s) == 1:
                vv[s[0]] = v
            else:
                for k in range(len(s)):
                    face = s[:k] + s[k + 1:]
                    if face not in by_simplex:
                        raise ValueError(f"face {face} of {s} is missing")
                    if by_simplex[face] > v:
                        raise ValueError(f"face {face} is valued above coface {s}")
        if np.any(np.isnan(vv)):
            raise ValueError("vertex ids must be contiguous from 0")
        edges = [s for s in by_simplex if len(s) == 2]
        tris = [s for s in by_simplex if len(s) == 3]
        return _assemble(
            vv,
            np.array(edges, dtype=np.intp).reshape(-1, 2),
            np.array([by_simplex[e] for e in edges]),
            np.array(tris, dtype=np.intp).reshape(-1, 3),
            np.array([by_simplex[t] for t in tris]),
        )


def _sort_simplices(S, vals):
    k = S.shape[1]
    keys = [S[:, c] for c in range(k - 1, -1, -1)] + [vals]
    order = np.lexsort(keys)
    return S[order], vals[order]


def _assemble(vertex_values, edges, edge_values, triangles, triangle_values):
    edges, edge_values = _sort_simplices(edges, np.asarray(edge_values, dtype=float))
    triangles, triangle_values = _sort_simplices(
        triangles, np.asarray(triangle_values, dtype=float)
    )
    return Filtration(
        np.asarray(vertex_values, dtype=float), edges, edge_values, triangles, triangle_values
    )


def rips_filtration(distances, r_max=np.inf):
    """Rips filtration of every simplex (dim <= 2) with diameter <= ``2 * r_max``.

    Vertices enter at 0 and other simplices at half their diameter.
    """
    D = check_distance_matrix(distances)
    r_max = check_scalar(r_max, "r_max", min_val=0.0)
    if np.isinf(r_max):
        r_max = float(D.max()) / 2.0
    cx = build_rips(D, r_max)
    return _assemble(
        np.zeros(cx.n_vertices), cx.edges, cx.edge_values, cx.triangles, cx.triangle_values
    )


def distance_to_set_filtration(complex, seed, distances):
    """Filter a fixed complex by distance to a seed vertex set.

    Each vertex is valued at its distance to the nearest seed vertex and every
    higher simplex at the maximum over its vertices.
    """
    if not isinstance(complex, RipsComplex):
        raise TypeError("complex must be a RipsComplex")
    seed = np.unique(np.asarray(seed, dtype=np.intp))
    if seed.size == 0:
        raise ValueError("seed set is empty")
    D = np.asarray(distances, dtype=float)
    if D.shape != (complex.n_vertices, complex.n_vertices):
        raise ValueError("distance matrix does not match the complex")
    vv = D[:, seed].min(axis=1)
    vv[seed] = 0.0
    E, T = complex.edges, complex.triangles
    ev = np.maximum(vv[E[:, 0]], vv[E[:, 1]]) if E.size else np.empty(0)
    tv = np.maximum.reduce([vv[T[:, 0]], vv[T[:, 1]], vv[T[:, 2]]]) if T.size else np.empty(0)
    return _assemble(vv, E, ev, T, tv)


def _vertex_order(vertex_values):
    return np.argsort(vertex_values, kind="stable")


def _edge_pass(filt):
    """Union-find over edges in filtration order (elder rule).

    Equivalent to reducing the edge columns: an edge that merges two
    components is negative and kills the younger one; any other edge is
    positive (creates a 1-cycle).
    """
    n = filt.n_vertices
    rank = np.empty(n, dtype=np.intp)
    rank[_vertex_order(filt.vertex_values)] = np.arange(n)
    uf = UnionFind(n)
    oldest = list(range(n))
    h0 = []
    positive = np.zeros(filt.edges.shape[0], dtype=bool)
    for k, (a, b) in enumerate(filt.edges.tolist()):
        ra, rb = uf.find(a), uf.find(b)
        if ra == rb:
            positive[k] = True
            continue
        oa, ob = oldest[ra], oldest[rb]
        young, old = (oa, ob) if rank[oa] > rank[ob] else (ob, oa)
        h0.append((filt.vertex_values[young], filt.edge_values[k]))
        uf.union(ra, rb)
        oldest[uf.find(ra)] = old
    for v in range(n):
        if uf.find(v) == v:
            h0.append((filt.vertex_values[oldest[v]], np.inf))
    return h0, positive


def _triangle_pass(filt, positive):
    """Reduce triangle boundary columns against positive edges.

    Columns are restricted to positive edges: pivots of reduced triangle
    columns are always positive edges, so dropping negative-edge rows leaves
    every pivot unchanged. Columns are Python ints used as GF(2) bitsets.
    """
    n_edges = filt.edges.shape[0]
    h1 = []
    remaining = int(positive.sum())
    if remaining == 0 or filt.triangles.shape[0] == 0:
        return h1, np.zeros(n_edges, dtype=bool)
    n = filt.n_vertices
    keys = filt.edges[:, 0] * n + filt.edges[:, 1]
    key_order = np.argsort(keys)
    T = filt.triangles
    faces = np.column_stack([T[:, 0] * n + T[:, 1], T[:, 0] * n + T[:, 2], T[:, 1] * n + T[:, 2]])
    face_idx = key_order[np.searchsorted(keys, faces, sorter=key_order)]
    face_pos = np.where(positive[face_idx], face_idx, -1).tolist()
    killed = np.zeros(n_edges, dtype=bool)
    pivots = {}
    for t, (a, b, c) in enumerate(face_pos):
        col = 0
        if a >= 0:
            col ^= 1 << a
        if b >= 0:
            col ^= 1 << b
        if c >= 0:
            col ^= 1 << c
        while col:
            low = col.bit_length() - 1
            other = pivots.get(low)
            if other is None:
                pivots[low] = col
                killed[low] = True
                h1.append((filt.edge_values[low], filt.triangle_values[t]))
                remaining -= 1
                break
            col ^= other
        if remaining == 0:
            break
    return h1, killed


def compute_persistence(filtration, degree=1):
    """Persistence diagram of a filtration in degree 0 or 1 over GF(2).

    Zero-length pairs are dropped; unpaired creators get ``death = inf``.
    """
    degree = check_scalar(degree, "degree", min_val=0, integer=True)
    if degree > 1:
        raise ValueError(f"unsupported homology degree {degree}; only 0 and 1")
    h0, positive = _edge_pass(filtration)
    if degree == 0:
        pairs = h0
    else:
        pairs, killed = _triangle_pass(filtration, positive)
        essential = np.flatnonzero(positive & ~killed)
        pairs += [(filtration.edge_values[e], np.inf) for e in essential]
    P = np.array(pairs, dtype=float).reshape(-1, 2)
    P = P[P[:, 1] > P[:, 0]]
    return PersistenceDiagram(degree, P)


def total_persistence(diagram, cap):
    """Sum of bar lengths with deaths clipped to ``cap``."""
    cap = check_scalar(cap, "cap")
    if not np.isfinite(cap):
        raise ValueError("cap must be finite")
    if len(diagram) == 0:
        return 0.0
    return float(np.sum(np.minimum(diagram.deaths, cap) - diagram.births))


class RipsPersistence(BaseEstimator, TransformerMixin):
    """Rips persistence diagrams for a collection of metric spaces.

    Parameters
    ----------
    degree : int, default=1
    r_max : float, default=inf
        Filtration is truncated at this scale (radius units).
    metric : {"euclidean", "precomputed"}, default="euclidean"
        With ``"precomputed"`` each input is a square distance matrix.
    """

    def __init__(self, degree=1, r_max=np.inf, metric="euclidean"):
        self.degree = degree
        self.r_max = r_max
        self.metric = metric

    def fit(self, X, y=None):
        if self.metric not in ("euclidean", "precomputed"):
            raise ValueError(f"unknown metric {self.metric!r}")
        check_scalar(self.degree, "degree", min_val=0, integer=True)
        return self

    def transform(self, X):
        from .geometry import pairwise_distances

        out = []
        for item in X:
            D = item if self.metric == "precomputed" else pairwise_distances(item)
            out.append(compute_persistence(rips_filtration(D, self.r_max), self.degree))
        return out
