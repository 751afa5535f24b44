"""Parallel single-linkage hierarchical clustering.

Pipeline: fused brute-force k-NN graph construction, a deterministic
Boruvka-variant spanning forest solver with order-preserving weight
alteration, cross-color 1-NN reconnection, union-find dendrogram
construction, and flat cluster extraction.
"""

from .core import (
    ColorArray,
    ConvergenceError,
    CsrGraph,
    Dendrogram,
    EdgeList,
    LinkageError,
    NeighborPair,
    PointMatrix,
    ValidationError,
    canonical_edge_key,
    edge_list_to_csr,
)
from .linkage import (
    LabelArray,
    LinkageConfig,
    build_dendrogram,
    compute_cut_level,
    connect_graph,
    extract_clusters,
    single_linkage,
)
from .mst import (
    AlteredGraph,
    MstResult,
    VertexCandidates,
    label_propagation,
    min_edge_per_supervertex,
    min_edge_per_vertex,
    solve_mst,
    weight_alteration,
)
from .neighbors import (
    KnnGraph,
    TileSpec,
    cross_color_1nn,
    fused_1nn,
    fused_knn,
    pairwise_l2_tile,
)

__version__ = "0.1.0"

__all__ = [
    "AlteredGraph",
    "ColorArray",
    "ConvergenceError",
    "CsrGraph",
    "Dendrogram",
    "EdgeList",
    "KnnGraph",
    "LabelArray",
    "LinkageConfig",
    "LinkageError",
    "MstResult",
    "NeighborPair",
    "PointMatrix",
    "TileSpec",
    "ValidationError",
    "VertexCandidates",
    "build_dendrogram",
    "canonical_edge_key",
    "compute_cut_level",
    "connect_graph",
    "cross_color_1nn",
    "edge_list_to_csr",
    "extract_clusters",
    "fused_1nn",
    "fused_knn",
    "label_propagation",
    "min_edge_per_supervertex",
    "min_edge_per_vertex",
    "pairwise_l2_tile",
    "single_linkage",
    "solve_mst",
    "weight_alteration",
]
