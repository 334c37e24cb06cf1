"""Distances and vectorizations of persistence diagrams."""

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_scalar
from .persistence import PersistenceDiagram

__all__ = [
    "STAT_NAMES",
    "STATS_SCHEMA",
    "PersistenceImage",
    "default_cap",
    "bottleneck_distance",
    "persistence_image",
    "diagram_stats",
    "vector_distance",
    "PersistenceImager",
    "DiagramStatistics",
]

STAT_NAMES = (
    "count",
    "birth_mean",
    "birth_std",
    "death_mean",
    "death_std",
    "persistence_mean",
    "persistence_std",
    "persistence_max",
    "persistence_sum",
)
STATS_SCHEMA = "diagram-stats/1"

CAP_FACTOR = 1.05


def default_cap(diagrams):
    """``1.05`` times the largest finite value over a collection of diagrams.

    Falls back to ``1.0`` when no diagram has a positive finite value.
    """
    m = max((d.max_finite_value() for d in diagrams), default=0.0)
    return CAP_FACTOR * m if m > 0 else 1.0


def _capped_points(diagram, cap):
    if cap is None:
        cap = default_cap([diagram])
    cap = check_scalar(cap, "cap")
    if not np.isfinite(cap):
        raise ValueError("cap must be finite")
    P = diagram.pairs
    if P.size and np.any(P[np.isfinite(P)] > cap):
        raise ValueError(f"cap {cap} is below a finite diagram value")
    return diagram.capped(cap)


def _matching_exists(cost, gap_a, gap_b, delta):
    n, m = gap_a.size, gap_b.size
    size = n + m
    adj = np.zeros((size, size), dtype=bool)
    # rows: A points then diagonal copies of B; cols: B points then diagonal copies of A
    adj[:n, :m] = cost <= delta
    adj[np.arange(n), m + np.arange(n)] = gap_a <= delta
    adj[n + np.arange(m), np.arange(m)] = gap_b <= delta
    adj[n:, m:] = True
    match = maximum_bipartite_matching(csr_matrix(adj), perm_type="column")
    return bool(np.all(match >= 0))


def bottleneck_distance(A, B, cap=None):
    """Bottleneck distance between two diagrams of the same degree.

    Infinite deaths are replaced by ``cap`` first (default: 1.05 times the
    largest finite value of either diagram). Exact: binary search over the
    finite set of candidate costs with a perfect-matching test at each step.
    """
    if A.degree != B.degree:
        raise ValueError(f"diagram degrees differ ({A.degree} vs {B.degree})")
    if cap is None:
        cap = default_cap([A, B])
    a = _capped_points(A, cap)
    b = _capped_points(B, cap)
    if a.shape[0] == 0 and b.shape[0] == 0:
        return 0.0
    cost = np.maximum(
        np.abs(a[:, None, 0] - b[None, :, 0]), np.abs(a[:, None, 1] - b[None, :, 1])
    )
    gap_a = (a[:, 1] - a[:, 0]) / 2.0
    gap_b = (b[:, 1] - b[:, 0]) / 2.0
    candidates = np.unique(np.concatenate([[0.0], cost.ravel(), gap_a, gap_b]))
    lo, hi = 0, candidates.size - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _matching_exists(cost, gap_a, gap_b, candidates[mid]):
            hi = mid
        else:
            lo = mid + 1
    return float(candidates[lo])


@dataclass(frozen=True, eq=False)
class PersistenceImage:
    """Pixel grid over (birth, persistence) coordinates.

    ``pixels`` has shape ``(n_pers, n_birth)``: rows run along persistence,
    columns along birth, so :attr:`vector` (row-major) has birth fastest.
    """

    pixels: np.ndarray
    birth_range: tuple
    pers_range: tuple
    sigma: float

    @property
    def resolution(self):
        return self.pixels.shape

    @property
    def vector(self):
        return self.pixels.ravel()


def _resolution(resolution):
    if np.isscalar(resolution):
        rows = cols = check_scalar(int(resolution), "resolution", min_val=1, integer=True)
    else:
        rows, cols = (check_scalar(int(x), "resolution", min_val=1, integer=True) for x in resolution)
    return rows, cols


def _check_range(rng, name):
    lo, hi = float(rng[0]), float(rng[1])
    if not (np.isfinite(lo) and np.isfinite(hi)) or hi <= lo:
        raise ValueError(f"{name} must be a finite nondegenerate interval, got {rng}")
    return lo, hi


def persistence_image(diagram, resolution, birth_range, pers_range, sigma, cap=None):
    """Persistence image of ``diagram``.

    Each point ``(b, d)`` becomes a Gaussian of width ``sigma`` centered at
    ``(b, min(d, cap) - b)`` with mass equal to its capped persistence; the
    density is integrated over each pixel with the midpoint rule.
    """
    rows, cols = _resolution(resolution)
    b_lo, b_hi = _check_range(birth_range, "birth_range")
    p_lo, p_hi = _check_range(pers_range, "pers_range")
    sigma = check_scalar(sigma, "sigma", min_val=0.0, include_min=False)
    pixels = np.zeros((rows, cols))
    if len(diagram):
        P = _capped_points(diagram, cap)
        births = P[:, 0]
        pers = P[:, 1] - P[:, 0]
        bw, pw = (b_hi - b_lo) / cols, (p_hi - p_lo) / rows
        bc = b_lo + (np.arange(cols) + 0.5) * bw
        pc = p_lo + (np.arange(rows) + 0.5) * pw
        gb = np.exp(-((bc[None, :] - births[:, None]) ** 2) / (2 * sigma**2))
        gp = np.exp(-((pc[None, :] - pers[:, None]) ** 2) / (2 * sigma**2))
        norm = bw * pw / (2 * np.pi * sigma**2)
        pixels = norm * np.einsum("k,kr,kc->rc", pers, gp, gb)
    return PersistenceImage(pixels, (b_lo, b_hi), (p_lo, p_hi), sigma)


def diagram_stats(diagram, cap=None):
    """Fixed-length summary vector, see :data:`STAT_NAMES`.

    Deaths and persistences use deaths clipped to ``cap``; standard
    deviations are population (``ddof=0``). Empty diagrams map to zeros.
    """
    out = np.zeros(len(STAT_NAMES))
    if len(diagram) == 0:
        return out
    P = _capped_points(diagram, cap)
    b, d = P[:, 0], P[:, 1]
    p = d - b
    out[:] = [len(P), b.mean(), b.std(), d.mean(), d.std(), p.mean(), p.std(), p.max(), p.sum()]
    return out


def vector_distance(u, v):
    """Euclidean distance between two equal-length vectors."""
    u = np.asarray(u, dtype=float).ravel()
    v = np.asarray(v, dtype=float).ravel()
    if u.shape != v.shape:
        raise ValueError(f"length mismatch: {u.size} vs {v.size}")
    return float(np.linalg.norm(u - v))


class PersistenceImager(BaseEstimator, TransformerMixin):
    """Vectorize diagrams as persistence images on a shared grid.

    ``fit`` fixes the cap, the grid ranges and the bandwidth from a
    collection of diagrams so that images of different diagrams are
    comparable.

    Parameters
    ----------
    resolution : int or (int, int), default=20
        ``(n_pers, n_birth)`` pixels.
    sigma : float or None
        Gaussian bandwidth. ``None`` uses 5% of the persistence range.
    cap : float or None
        Replacement for infinite deaths. ``None`` uses 1.05 times the
        largest finite value seen in ``fit``.
    birth_range, pers_range : (float, float) or None
        Grid extents; ``None`` derives them from the fitted diagrams.
    """

    def __init__(self, resolution=20, sigma=None, cap=None, birth_range=None, pers_range=None):
        self.resolution = resolution
        self.sigma = sigma
        self.cap = cap
        self.birth_range = birth_range
        self.pers_range = pers_range

    def fit(self, X, y=None):
        diagrams = list(X)
        self.cap_ = default_cap(diagrams) if self.cap is None else float(self.cap)
        pts = [_capped_points(d, self.cap_) for d in diagrams if len(d)]
        pts = np.concatenate(pts) if pts else np.zeros((0, 2))
        if self.pers_range is None:
            p_hi = float((pts[:, 1] - pts[:, 0]).max()) if pts.size else 0.0
            self.pers_range_ = (0.0, p_hi if p_hi > 0 else 1.0)
        else:
            self.pers_range_ = _check_range(self.pers_range, "pers_range")
        width = self.pers_range_[1] - self.pers_range_[0]
        if self.birth_range is None:
            if pts.size and pts[:, 0].max() > pts[:, 0].min():
                self.birth_range_ = (float(pts[:, 0].min()), float(pts[:, 0].max()))
            else:
                b = float(pts[0, 0]) if pts.size else 0.0
                self.birth_range_ = (b - width / 2, b + width / 2)
        else:
            self.birth_range_ = _check_range(self.birth_range, "birth_range")
        self.sigma_ = 0.05 * width if self.sigma is None else float(self.sigma)
        self.n_features_out_ = int(np.prod(_resolution(self.resolution)))
        return self

    def transform_one(self, diagram):
        check_is_fitted(self)
        return persistence_image(
            diagram, self.resolution, self.birth_range_, self.pers_range_, self.sigma_, self.cap_
        )

    def transform(self, X):
        check_is_fitted(self)
        vecs = [self.transform_one(d).vector for d in X]
        return np.array(vecs).reshape(len(vecs), self.n_features_out_)


class DiagramStatistics(BaseEstimator, TransformerMixin):
    """Summary-statistics vectorization (see :data:`STAT_NAMES`)."""

    def __init__(self, cap=None):
        self.cap = cap

    def fit(self, X, y=None):
        self.cap_ = default_cap(list(X)) if self.cap is None else float(self.cap)
        return self

    def transform(self, X):
        check_is_fitted(self)
        rows = [diagram_stats(d, self.cap_) for d in X]
        return np.array(rows).reshape(len(rows), len(STAT_NAMES))

    def get_feature_names_out(self, input_features=None):
        return np.array(STAT_NAMES, dtype=object)


def as_diagram(pairs, degree=1):
    """Convenience constructor from a list of ``(birth, death)`` pairs."""
    return PersistenceDiagram(degree, np.asarray(pairs, dtype=float).reshape(-1, 2))
