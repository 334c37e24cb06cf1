"""Synthetic torus/cylinder shape comparison and analysis artifacts."""

from dataclasses import asdict, dataclass, field

import numpy as np
from joblib import Parallel, delayed
from scipy.spatial.transform import Rotation
from sklearn.base import BaseEstimator

from ._validation import check_scalar
from .diagrams import STAT_NAMES, STATS_SCHEMA, default_cap, diagram_stats
from .fgw import fit_vectorizer, pairwise_fgw_sweep
from .geometry import PointCloud
from .reeb import ReebGraphTransformer

__all__ = [
    "SHAPES",
    "ShapeSpec",
    "ExperimentReport",
    "sample_shape",
    "make_dataset",
    "mds_embed",
    "ClassicalMDS",
    "loo_1nn_accuracy",
    "separation_scores",
    "run_alpha_sweep",
    "export_feature_graphs",
    "write_report",
    "DEFAULT_MANIFEST",
]

SHAPES = ("torus", "solid-torus", "cylinder", "solid-cylinder")


@dataclass(frozen=True)
class ShapeSpec:
    """Parameters for one synthetic shape sample.

    ``length=None`` means ``2 * pi * (major_radius + minor_radius)``, which
    gives the cylinder roughly the torus's surface area.
    """

    shape: str
    n_points: int
    minor_radius: float = 1.0
    major_radius: float = 6.0
    cylinder_radius: float = 1.0
    length: float | None = None
    noise: float = 0.05
    seed: int = 0
    rotate: bool = True

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ValueError(f"unknown shape {self.shape!r}; expected one of {SHAPES}")
        check_scalar(self.n_points, "n_points", min_val=1, integer=True)
        for name in ("minor_radius", "major_radius", "cylinder_radius"):
            check_scalar(getattr(self, name), name, min_val=0.0, include_min=False)
        if self.length is not None:
            check_scalar(self.length, "length", min_val=0.0, include_min=False)
        check_scalar(self.noise, "noise", min_val=0.0)

    @property
    def cylinder_length(self):
        if self.length is not None:
            return float(self.length)
        return 2.0 * np.pi * (self.major_radius + self.minor_radius)


def _torus(spec, rng, solid):
    R, a = spec.major_radius, spec.minor_radius
    out = np.empty((0, 3))
    while out.shape[0] < spec.n_points:
        k = 2 * (spec.n_points - out.shape[0]) + 16
        theta = rng.uniform(0, 2 * np.pi, k)
        phi = rng.uniform(0, 2 * np.pi, k)
        rho = a * np.sqrt(rng.uniform(0, 1, k)) if solid else np.full(k, a)
        # area/volume element carries a factor (R + rho cos theta)
        keep = rng.uniform(0, 1, k) * (R + a) <= R + rho * np.cos(theta)
        ring = R + rho * np.cos(theta)
        pts = np.column_stack([ring * np.cos(phi), ring * np.sin(phi), rho * np.sin(theta)])
        out = np.vstack([out, pts[keep]])
    return out[: spec.n_points]


def _cylinder(spec, rng, solid):
    n, c, L = spec.n_points, spec.cylinder_radius, spec.cylinder_length
    theta = rng.uniform(0, 2 * np.pi, n)
    rho = c * np.sqrt(rng.uniform(0, 1, n)) if solid else np.full(n, c)
    z = rng.uniform(-L / 2, L / 2, n)
    return np.column_stack([rho * np.cos(theta), rho * np.sin(theta), z])


def sample_shape(spec):
    """Sample a noisy, randomly rotated torus or cylinder (surface or solid).

    Surface samples are uniform with respect to area, solid samples with
    respect to volume. Gaussian noise of standard deviation ``spec.noise``
    is added per coordinate, then a uniformly random rotation is applied.
    Deterministic given ``spec.seed``.
    """
    rng = np.random.default_rng(spec.seed)
    solid = spec.shape.startswith("solid")
    if spec.shape.endswith("torus"):
        X = _torus(spec, rng, solid)
    else:
        X = _cylinder(spec, rng, solid)
    if spec.noise > 0:
        X = X + rng.normal(scale=spec.noise, size=X.shape)
    if spec.rotate:
        X = X @ Rotation.random(random_state=rng).as_matrix().T
    return PointCloud(points=X)


def make_dataset(per_class=5, n_points=None, noise=0.05, seed=0, classes=SHAPES):
    """Shape specs for a balanced dataset; seeds are ``seed, seed+1, ...``."""
    n_points = n_points or {"torus": 200, "solid-torus": 800, "cylinder": 200, "solid-cylinder": 800}
    specs = []
    s = seed
    for shape in classes:
        for _ in range(per_class):
            specs.append(ShapeSpec(shape, int(n_points[shape]), noise=noise, seed=s))
            s += 1
    return specs


def mds_embed(distances, dim=2):
    """Classical (Torgerson) MDS.

    Double-centers the squared distances and projects onto the top
    eigenvectors. Each axis is oriented so that its largest-magnitude entry
    is positive. Axes with nonpositive eigenvalues are returned as zeros.
    """
    D = np.asarray(distances, dtype=float)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise ValueError("distance matrix must be square")
    if np.max(np.abs(D - D.T), initial=0.0) > 1e-9 * max(1.0, float(np.abs(D).max(initial=0.0))):
        raise ValueError("distance matrix is not symmetric")
    n = D.shape[0]
    J = np.eye(n) - 1.0 / n
    B = -0.5 * J @ (D**2) @ J
    B = (B + B.T) / 2
    evals, evecs = np.linalg.eigh(B)
    order = np.argsort(evals)[::-1][:dim]
    Y = np.zeros((n, dim))
    for k, idx in enumerate(order):
        if evals[idx] <= 1e-12 * max(1.0, abs(evals).max()):
            continue
        v = evecs[:, idx]
        if v[np.argmax(np.abs(v))] < 0:
            v = -v
        Y[:, k] = v * np.sqrt(evals[idx])
    return Y


class ClassicalMDS(BaseEstimator):
    """Classical MDS on a precomputed dissimilarity matrix."""

    def __init__(self, n_components=2):
        self.n_components = n_components

    def fit(self, X, y=None):
        self.embedding_ = mds_embed(X, self.n_components)
        return self

    def fit_transform(self, X, y=None):
        return self.fit(X).embedding_


def loo_1nn_accuracy(distances, labels, subset=None):
    """Leave-one-out 1-nearest-neighbor accuracy.

    Ties go to the lowest index. ``subset`` restricts both queries and
    neighbors to the given classes.
    """
    D = np.asarray(distances, dtype=float)
    labels = np.asarray(labels)
    idx = np.arange(len(labels)) if subset is None else np.flatnonzero(np.isin(labels, subset))
    if idx.size < 2:
        raise ValueError("need at least two samples")
    sub = D[np.ix_(idx, idx)].copy()
    np.fill_diagonal(sub, np.inf)
    nn = np.argmin(sub, axis=1)
    return float(np.mean(labels[idx][nn] == labels[idx]))


def separation_scores(distances, labels):
    """Overall and per-class-pair leave-one-out 1-NN accuracies."""
    labels = np.asarray(labels)
    classes = list(dict.fromkeys(labels.tolist()))
    scores = {"overall": loo_1nn_accuracy(distances, labels)}
    for i, a in enumerate(classes):
        for b in classes[i + 1:]:
            scores[f"{a}|{b}"] = loo_1nn_accuracy(distances, labels, [a, b])
    return scores


DEFAULT_MANIFEST = {
    "per_class": 5,
    "n_points": {"torus": 200, "solid-torus": 800, "cylinder": 200, "solid-cylinder": 800},
    "noise": 0.05,
    "seed": 0,
    "alphas": [0.0, 0.25, 0.5, 1.0],
    "drg": {"filter": "pca", "component": 0, "p": 100.0, "m": 2, "n_bins": 6, "degree": 1, "decoration": "local"},
    "attr_mode": "image",
    "image": {"resolution": 20, "sigma": None, "cap": None},
    "solver": {"max_iter": 100, "tol": 1e-9, "n_init": 1, "random_state": 0},
}


@dataclass
class ExperimentReport:
    """Everything produced by :func:`run_alpha_sweep`.

    ``distances``, ``mds`` and ``separation`` are keyed by alpha.
    """

    names: list
    labels: list
    alphas: list
    distances: dict
    mds: dict
    separation: dict
    manifest: dict
    drgs: list = field(default_factory=list, repr=False)


def _build(spec, transformer, name):
    return transformer.build_one(sample_shape(spec), name=name)


def run_alpha_sweep(specs, alphas, drg_params=None, attr_mode="image", image_params=None,
                    solver_params=None, n_jobs=None, manifest=None):
    """Sample shapes, build local DRGs, and compare them for every alpha.

    Pipeline per shape: sample, filter, choose scale, estimate the Reeb
    graph, decorate locally. The node diagrams of all shapes share one
    vectorizer; then one FGW distance matrix, MDS embedding and set of
    separation scores is produced per alpha.
    """
    specs = list(specs)
    if len({s.shape for s in specs}) < 2:
        raise ValueError("need at least two shape classes")
    drg_params = {**DEFAULT_MANIFEST["drg"], **(drg_params or {})}
    image_params = {**DEFAULT_MANIFEST["image"], **(image_params or {})}
    solver_params = {**DEFAULT_MANIFEST["solver"], **(solver_params or {})}
    alphas = [float(a) for a in alphas]

    transformer = ReebGraphTransformer(**drg_params)
    names = [f"{s.shape}-{k}" for k, s in enumerate(specs)]
    if n_jobs in (None, 1):
        drgs = [_build(s, transformer, n) for s, n in zip(specs, names)]
    else:
        drgs = Parallel(n_jobs=n_jobs)(delayed(_build)(s, transformer, n) for s, n in zip(specs, names))

    vectorizer = fit_vectorizer(drgs, attr_mode, **image_params) if attr_mode != "bottleneck" \
        else fit_vectorizer(drgs, attr_mode, cap=image_params.get("cap"))
    mats = pairwise_fgw_sweep(drgs, alphas, attr_mode, vectorizer=vectorizer, n_jobs=n_jobs, **solver_params)
    labels = [s.shape for s in specs]
    distances = dict(zip(alphas, mats))
    mds = {a: mds_embed(D) for a, D in distances.items()}
    separation = {a: separation_scores(D, labels) for a, D in distances.items()}
    if manifest is None:
        manifest = {
            "specs": [asdict(s) for s in specs],
            "alphas": alphas,
            "drg": drg_params,
            "attr_mode": attr_mode,
            "image": image_params,
            "solver": solver_params,
        }
    return ExperimentReport(names, labels, alphas, distances, mds, separation, manifest, drgs)


FEATURE_SCHEMA = "drg-feature-graph/1"


def export_feature_graphs(drgs, cap=None):
    """Vector-attributed graphs for external GNN tooling.

    Each node gets its diagram's summary statistics followed by the mean
    coordinates of its member points. Returns one JSON-serializable record
    per DRG.
    """
    drgs = list(drgs)
    if cap is None:
        cap = default_cap([d for g in drgs for d in g.diagrams])
    records = []
    for g in drgs:
        cents = g.skeleton.centroids
        dim = 0 if cents is None else cents.shape[1]
        names = list(STAT_NAMES) + [f"mean_x{k}" for k in range(dim)]
        nodes = []
        for v, dgm in enumerate(g.diagrams):
            row = diagram_stats(dgm, cap).tolist()
            if cents is not None:
                row += cents[v].tolist()
            nodes.append(row)
        records.append({
            "schema": FEATURE_SCHEMA,
            "stats_schema": STATS_SCHEMA,
            "name": g.name,
            "cap": float(cap),
            "feature_names": names,
            "nodes": nodes,
            "edges": g.skeleton.edges.tolist(),
        })
    return records


def _alpha_tag(alpha):
    from .io import fmt_float

    return fmt_float(alpha)


def write_report(report, out_dir):
    """Write the report bundle into ``out_dir`` (created if missing).

    Files: ``manifest.json``, ``distances_alpha_<a>.csv``,
    ``mds_alpha_<a>.csv``, ``separation.csv`` and ``features.jsonl``.
    Returns the list of written paths.
    """
    import json
    import os

    from .io import feature_graphs_to_jsonl, matrix_to_csv, table_to_csv, write_text

    os.makedirs(out_dir, exist_ok=True)
    written = []

    def put(name, text):
        path = os.path.join(out_dir, name)
        write_text(path, text)
        written.append(path)

    put("manifest.json", json.dumps(report.manifest, indent=2, sort_keys=True) + "\n")
    sep_rows = []
    for a in report.alphas:
        tag = _alpha_tag(a)
        put(f"distances_alpha_{tag}.csv", matrix_to_csv(report.names, report.distances[a]))
        Y = report.mds[a]
        rows = [[n, lab] + y.tolist() for n, lab, y in zip(report.names, report.labels, Y)]
        put(f"mds_alpha_{tag}.csv", table_to_csv(["id", "label", "x", "y"][: 2 + Y.shape[1]], rows))
        sep_rows += [[tag, k, v] for k, v in report.separation[a].items()]
    put("separation.csv", table_to_csv(["alpha", "classes", "loo_1nn_accuracy"], sep_rows))
    put("features.jsonl", feature_graphs_to_jsonl(export_feature_graphs(report.drgs)))
    return written
