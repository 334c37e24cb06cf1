"""Decorated Reeb graphs: Mapper skeletons whose nodes carry persistence
diagrams, compared with a fused Gromov-Wasserstein distance."""

from .complex import RipsComplex, UnionFind, build_rips, connected_components, connectivity_threshold
from .diagrams import (
    DiagramStatistics,
    PersistenceImager,
    bottleneck_distance,
    diagram_stats,
    persistence_image,
)
from .experiments import ClassicalMDS, ShapeSpec, make_dataset, mds_embed, run_alpha_sweep, sample_shape
from .fgw import FGWDistance, fgw_distance, fgw_solve, pairwise_fgw
from .geometry import FilterValues, PointCloud, eccentricity_filter, pca_filter
from .io import load_drg, save_drg
from .persistence import PersistenceDiagram, RipsPersistence, compute_persistence, rips_filtration
from .reeb import (
    DecoratedReebGraph,
    ReebGraphTransformer,
    ReebSkeleton,
    choose_scale,
    decorate_barcode_transform,
    decorate_local,
    estimate_reeb,
)
from .transport import uniform_transport

__version__ = "0.1.0"

__all__ = [
    "PointCloud",
    "FilterValues",
    "pca_filter",
    "eccentricity_filter",
    "UnionFind",
    "RipsComplex",
    "build_rips",
    "connected_components",
    "connectivity_threshold",
    "PersistenceDiagram",
    "rips_filtration",
    "compute_persistence",
    "RipsPersistence",
    "bottleneck_distance",
    "persistence_image",
    "diagram_stats",
    "PersistenceImager",
    "DiagramStatistics",
    "ReebSkeleton",
    "DecoratedReebGraph",
    "estimate_reeb",
    "choose_scale",
    "decorate_local",
    "decorate_barcode_transform",
    "ReebGraphTransformer",
    "uniform_transport",
    "fgw_solve",
    "fgw_distance",
    "pairwise_fgw",
    "FGWDistance",
    "ShapeSpec",
    "sample_shape",
    "make_dataset",
    "mds_embed",
    "ClassicalMDS",
    "run_alpha_sweep",
    "load_drg",
    "save_drg",
]
