"""Single-linkage clustering pipeline.

Stages: k-NN graph, spanning forest, reconnection of any remaining
components via cross-color 1-NN queries, union-find dendrogram
construction over the weight-sorted tree edges, and flat cluster
extraction by cutting the dendrogram.

Distances flow through the pipeline as squared L2 (monotone-equivalent
for tree topology); the euclidean metric only changes the distances
reported in the dendrogram.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
from numba import njit

from .core import (
    ColorArray,
    ConvergenceError,
    Dendrogram,
    EdgeList,
    ValidationError,
    as_point_matrix,
    edge_list_to_csr,
)
from .mst import solve_mst
from .neighbors import TileSpec, cross_color_1nn, fused_knn

METRICS = ("euclidean", "sqeuclidean")


@dataclass(frozen=True)
class LinkageConfig:
    """Knobs for the end-to-end clustering run.

    k bounds the connectivity graph; values above 64 must be enabled
    explicitly since the scan cost grows with k. max_connect_iters caps
    the reconnection loop and defaults to ceil(log2 N) + 8 at run time.
    """

    n_clusters: int
    k: int = 15
    metric: str = "euclidean"
    seed: int = 0
    max_connect_iters: int | None = None
    allow_large_k: bool = False

    def __post_init__(self):
        if self.n_clusters < 1:
            raise ValidationError(f"n_clusters must be >= 1, got {self.n_clusters}")
        if self.k < 1:
            raise ValidationError(f"k must be >= 1, got {self.k}")
        if self.k > 64 and not self.allow_large_k:
            raise ValidationError(
                f"k={self.k} exceeds 64; set allow_large_k=True to permit it"
            )
        if self.metric not in METRICS:
            raise ValidationError(f"metric must be one of {METRICS}, got {self.metric!r}")
        if self.max_connect_iters is not None and self.max_connect_iters < 0:
            raise ValidationError("max_connect_iters must be >= 0")


@dataclass(frozen=True)
class LabelArray:
    """Flat cluster assignment: one label in [0, n_clusters) per point."""

    labels: np.ndarray
    n_clusters: int

    def __post_init__(self):
        arr = np.asarray(self.labels, dtype=np.int64).ravel()
        distinct = np.unique(arr)
        if len(distinct) != self.n_clusters or (
            len(distinct) and (distinct[0] < 0 or distinct[-1] >= self.n_clusters)
        ):
            raise ValidationError(
                f"labels must cover exactly {self.n_clusters} values in range"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "labels", arr)

    def __len__(self) -> int:
        return len(self.labels)


@njit(cache=True, nogil=True)
def _uf_find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


@njit(cache=True, nogil=True)
def _dendrogram_merge(src, dst, weight, n):
    parent = np.arange(n)
    rank = np.zeros(n, dtype=np.int64)
    cluster_id = np.arange(n)
    size = np.ones(n, dtype=np.int64)
    rows = np.empty((n - 1, 4))
    for i in range(n - 1):
        ra = _uf_find(parent, src[i])
        rb = _uf_find(parent, dst[i])
        if ra == rb:
            return rows, False
        ca = cluster_id[ra]
        cb = cluster_id[rb]
        merged = size[ra] + size[rb]
        rows[i, 0] = min(ca, cb)
        rows[i, 1] = max(ca, cb)
        rows[i, 2] = weight[i]
        rows[i, 3] = merged
        if rank[ra] < rank[rb]:
            ra, rb = rb, ra
        parent[rb] = ra
        if rank[ra] == rank[rb]:
            rank[ra] += 1
        cluster_id[ra] = n + i
        size[ra] = merged
    return rows, True


@njit(cache=True, nogil=True)
def _inherit_labels(parent, node_labels, n):
    out = np.empty(n, dtype=np.int64)
    stack = np.empty(parent.shape[0], dtype=np.int64)
    for p in range(n):
        node = p
        depth = 0
        while node_labels[node] < 0:
            stack[depth] = node
            depth += 1
            node = parent[node]
        lab = node_labels[node]
        # memoize the walked path so later chains stop early
        for s in range(depth):
            node_labels[stack[s]] = lab
        out[p] = lab
    return out


def compute_cut_level(n_points: int, n_clusters: int) -> int:
    """Dendrogram level below which merges are kept for n_clusters labels."""
    if not 1 <= n_clusters <= n_points:
        raise ValidationError(
            f"n_clusters must be in [1, {n_points}], got {n_clusters}"
        )
    return (n_points - 1) - (n_clusters - 1)


def build_dendrogram(mst_edges: EdgeList, n_points: int) -> Dendrogram:
    """Merge table from the spanning tree edges.

    Edges are sorted ascending by (weight, canonical key) and folded with
    a union-find (union by rank, path compression); merge i records the
    current representatives of its two endpoints and creates parent id
    i + n_points.
    """
    if n_points < 2:
        raise ValidationError("dendrogram needs at least 2 points")
    if len(mst_edges) != n_points - 1:
        raise ValidationError(
            f"spanning tree over {n_points} points needs {n_points - 1} edges, "
            f"got {len(mst_edges)}"
        )
    a = np.minimum(mst_edges.src, mst_edges.dst)
    b = np.maximum(mst_edges.src, mst_edges.dst)
    order = np.lexsort((b, a, mst_edges.weight))
    rows, ok = _dendrogram_merge(a[order], b[order], mst_edges.weight[order], n_points)
    if not ok:
        raise ValidationError("edges contain a cycle: not a spanning tree")
    return Dendrogram(n_points, rows)


def extract_clusters(dendrogram: Dendrogram, n_clusters: int) -> LabelArray:
    """Flat labels from cutting the dendrogram to n_clusters components.

    Roots are the nodes never consumed as children below the cut level;
    the smallest root id gets label 0 and so on, and every point inherits
    the label of its nearest labeled ancestor by walking parent links.
    """
    n = dendrogram.n_points
    cut = compute_cut_level(n, n_clusters)
    child_a = dendrogram.child_a
    child_b = dendrogram.child_b

    consumed = np.zeros(n + cut, dtype=bool)
    consumed[child_a[:cut]] = True
    consumed[child_b[:cut]] = True
    roots = np.nonzero(~consumed)[0]
    if len(roots) != n_clusters:
        raise ValidationError(
            f"internal: found {len(roots)} label roots for {n_clusters} clusters"
        )

    total = 2 * n - 1
    node_labels = np.full(total, -1, dtype=np.int64)
    node_labels[roots] = np.arange(n_clusters, dtype=np.int64)
    parent = np.full(total, -1, dtype=np.int64)
    parent_ids = n + np.arange(n - 1, dtype=np.int64)
    parent[child_a] = parent_ids
    parent[child_b] = parent_ids
    labels = _inherit_labels(parent, node_labels, n)
    return LabelArray(labels, n_clusters)


def _resolve_connect_budget(cfg: LinkageConfig, n_points: int) -> int:
    if cfg.max_connect_iters is not None:
        return cfg.max_connect_iters
    return math.ceil(math.log2(max(n_points, 2))) + 8


def connect_graph(x, mst_edges: EdgeList, colors: ColorArray,
                  cfg: LinkageConfig, *, tile: TileSpec | None = None,
                  threads: int | None = None) -> EdgeList:
    """Grow a spanning forest into a spanning tree.

    While more than one color remains, the cross-color 1-NN edges are
    appended to the accumulated edge set and the spanning forest is
    re-solved on the union. Edge weights here live in squared L2 space,
    matching the internal pipeline metric.
    """
    pm = as_point_matrix(x)
    budget = _resolve_connect_budget(cfg, pm.n_rows)
    iters = 0
    while colors.n_components > 1:
        if iters >= budget:
            counts = np.bincount(colors.colors)
            sizes = np.sort(counts[counts > 0])[::-1][:8]
            raise ConvergenceError(
                f"reconnection did not converge within {budget} iterations: "
                f"{colors.n_components} components remain (largest sizes {sizes.tolist()})"
            )
        bridges = cross_color_1nn(pm, colors, squared=True, tile=tile, threads=threads)
        union = EdgeList(
            pm.n_rows,
            np.concatenate([mst_edges.src, bridges.src]),
            np.concatenate([mst_edges.dst, bridges.dst]),
            np.concatenate([mst_edges.weight, bridges.weight]),
        )
        result = solve_mst(edge_list_to_csr(union), seed=cfg.seed, threads=threads)
        mst_edges = result.edges
        colors = result.colors
        iters += 1
    return mst_edges


def single_linkage(x, cfg: LinkageConfig, *, tile: TileSpec | None = None,
                   threads: int | None = None,
                   timings: dict | None = None) -> tuple[Dendrogram, LabelArray]:
    """End-to-end single-linkage clustering of a point matrix.

    Args:
        x: point matrix (N x d), N >= 2.
        cfg: run configuration; n_clusters and k are validated against N.
        tile: scan tile shape (results are independent of it).
        threads: worker threads for the parallel stages.
        timings: optional dict that receives per-stage milliseconds.

    Returns:
        The full dendrogram and the flat labels for cfg.n_clusters.
    """
    pm = as_point_matrix(x)
    n = pm.n_rows
    if n < 2:
        raise ValidationError(f"need at least 2 points, got {n}")
    if cfg.n_clusters > n:
        raise ValidationError(f"n_clusters={cfg.n_clusters} exceeds {n} points")
    if cfg.k > n - 1:
        raise ValidationError(f"k={cfg.k} exceeds N-1={n - 1}")

    marks = {}

    def stage(name):
        marks[name] = time.perf_counter()

    stage("start")
    knn = fused_knn(pm, cfg.k, tile, squared=True, threads=threads)
    stage("knn")
    forest = solve_mst(edge_list_to_csr(knn.to_edge_list()), seed=cfg.seed,
                       threads=threads)
    stage("mst")
    spanning = connect_graph(pm, forest.edges, forest.colors, cfg,
                             tile=tile, threads=threads)
    stage("connect")
    weights = spanning.weight
    if cfg.metric == "euclidean":
        weights = np.sqrt(weights)
    dendrogram = build_dendrogram(
        EdgeList(n, spanning.src, spanning.dst, weights), n
    )
    stage("dendrogram")
    labels = extract_clusters(dendrogram, cfg.n_clusters)
    stage("extract")

    if timings is not None:
        keys = ["knn", "mst", "connect", "dendrogram", "extract"]
        prev = marks["start"]
        for key in keys:
            timings[key] = (marks[key] - prev) * 1000.0
            prev = marks[key]
    return dendrogram, labels
