"""Deterministic parallel Boruvka-variant spanning tree / forest solver.

Edge weights are first altered: every undirected edge receives a seeded
hash perturbation epsilon in [0, theta) where theta is the minimum
positive gap between distinct weights. The perturbation keeps the
relative order of distinct weights while separating ties, so each
component's minimum outgoing edge is unique and rounds of per-vertex /
per-color minimum selection plus color propagation converge to the same
tree regardless of scheduling. Float collisions among altered values are
resolved by a final comparator tie-break on the canonical edge key, so
the solver's edge order is a strict total order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .core import (
    ColorArray,
    CsrGraph,
    EdgeList,
    LinkageError,
    NeighborPair,
    ValidationError,
)
from .parallel import block_ranges, resolve_threads, run_tasks

# epsilon scale keeps w + eps strictly below the next distinct weight
_EPS_SCALE = 1.0 - 2.0 ** -20
_THETA_FALLBACK = 2.0 ** -20


@dataclass(frozen=True)
class AlteredGraph:
    """CSR graph with tie-breaking weights plus the originals they replace."""

    graph: CsrGraph
    original_weights: np.ndarray
    theta: float
    seed: int

    def __post_init__(self):
        orig = np.asarray(self.original_weights, dtype=np.float64).ravel()
        if len(orig) != self.graph.n_edges:
            raise ValidationError("original_weights must parallel the CSR entries")
        orig.setflags(write=False)
        object.__setattr__(self, "original_weights", orig)


@dataclass(frozen=True)
class MstResult:
    """Accepted spanning edges (original weights), final colors, component count."""

    edges: EdgeList
    colors: ColorArray
    n_components: int


@dataclass(frozen=True)
class VertexCandidates:
    """Per-vertex minimum cross-color edge; position -1 encodes 'none'.

    position indexes the CSR entry the candidate came from; dst, altered
    and original weights are denormalized for convenience.
    """

    src: np.ndarray
    dst: np.ndarray
    position: np.ndarray
    altered_weight: np.ndarray
    original_weight: np.ndarray

    def pair(self, vertex: int) -> NeighborPair | None:
        if self.position[vertex] < 0:
            return None
        return NeighborPair(int(self.dst[vertex]), float(self.altered_weight[vertex]))


@njit(cache=True, nogil=True)
def _hash_unit(a, b, seed):
    # splitmix64 of the canonical key; identical for both edge directions
    z = np.uint64(a) * np.uint64(0x9E3779B97F4A7C15)
    z ^= np.uint64(b) + np.uint64(0xBF58476D1CE4E5B9)
    z ^= np.uint64(seed) * np.uint64(0x94D049BB133111EB)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    z = z ^ (z >> np.uint64(31))
    return (z >> np.uint64(11)) * 2.0 ** -53


@njit(cache=True, nogil=True)
def _alter_weights(row_offsets, col_indices, weights, theta, seed):
    n = row_offsets.shape[0] - 1
    out = np.empty_like(weights)
    eps_max = theta * _EPS_SCALE
    for v in range(n):
        for p in range(row_offsets[v], row_offsets[v + 1]):
            u = col_indices[p]
            a = v if v < u else u
            b = u if v < u else v
            out[p] = weights[p] + _hash_unit(a, b, seed) * eps_max
    return out


@njit(cache=True, nogil=True)
def _min_edge_scan(row_offsets, col_indices, alt_w, colors, v0, v1, out_pos):
    for v in range(v0, v1):
        cv = colors[v]
        best = np.int64(-1)
        bw = np.inf
        ba = np.int64(-1)
        bb = np.int64(-1)
        for p in range(row_offsets[v], row_offsets[v + 1]):
            u = col_indices[p]
            if colors[u] == cv:
                continue
            w = alt_w[p]
            a = v if v < u else u
            b = u if v < u else v
            if w < bw or (w == bw and (a < ba or (a == ba and b < bb))):
                best = p
                bw = w
                ba = a
                bb = b
        out_pos[v] = best


@njit(cache=True, nogil=True)
def _reconcile_per_color(position, dst, alt_weight, colors, best_vertex):
    n = position.shape[0]
    for v in range(n):
        if position[v] < 0:
            continue
        c = colors[v]
        s = best_vertex[c]
        if s < 0:
            best_vertex[c] = v
            continue
        u = dst[v]
        w = alt_weight[v]
        a = v if v < u else u
        b = u if v < u else v
        t = dst[s]
        qw = alt_weight[s]
        qa = s if s < t else t
        qb = t if s < t else s
        if w < qw or (w == qw and (a < qa or (a == qa and b < qb))):
            best_vertex[c] = v


@njit(cache=True, nogil=True)
def _propagate_colors(colors, us, vs, next_color):
    n = colors.shape[0]
    while True:
        changed = False
        for c in range(n):
            next_color[c] = c
        for e in range(us.shape[0]):
            a = colors[us[e]]
            b = colors[vs[e]]
            if a == b:
                continue
            m = a if a < b else b
            if next_color[a] > m:
                next_color[a] = m
            if next_color[b] > m:
                next_color[b] = m
        # shortcut pointer chains so long color paths collapse quickly
        jumping = True
        while jumping:
            jumping = False
            for c in range(n):
                t = next_color[next_color[c]]
                if t < next_color[c]:
                    next_color[c] = t
                    jumping = True
        for v in range(n):
            nc = next_color[colors[v]]
            if nc < colors[v]:
                colors[v] = nc
                changed = True
        if not changed:
            return


def _require_symmetric_finite(g: CsrGraph) -> None:
    if g.n_vertices == 0:
        raise ValidationError("empty graph: no vertices")
    if not np.isfinite(g.weights).all():
        raise ValidationError("graph contains non-finite edge weights")
    if not g.is_symmetric():
        raise ValidationError("graph must be symmetric: every (i, j, w) needs its (j, i, w)")


def weight_alteration(g: CsrGraph, seed: int = 0) -> AlteredGraph:
    """Perturb edge weights into a strict order-preserving total order.

    theta is the minimum positive difference between distinct weights;
    each undirected edge gets epsilon in [0, theta) from a seeded hash of
    its canonical key, replicated to both directions. Graphs whose weights
    are all equal have no positive gap, so theta falls back to a small
    multiple of the weight magnitude. Zero weights are rejected: the
    perturbation could not be distinguished from an absent edge.
    """
    _require_symmetric_finite(g)
    if len(g.weights) and np.any(g.weights == 0.0):
        raise ValidationError("zero-weight edges are not supported")
    if len(g.weights) == 0:
        theta = 0.0
        altered = g.weights.copy()
    else:
        uniq = np.unique(g.weights)
        if len(uniq) >= 2:
            theta = float(np.diff(uniq).min())
        else:
            theta = max(abs(float(uniq[0])), 1.0) * _THETA_FALLBACK
        altered = _alter_weights(g.row_offsets, g.col_indices, g.weights, theta, seed)
    graph = CsrGraph(g.n_vertices, g.row_offsets, g.col_indices, altered)
    return AlteredGraph(graph, g.weights, theta, seed)


def min_edge_per_vertex(g: AlteredGraph, colors: ColorArray, *,
                        threads: int | None = None) -> VertexCandidates:
    """Minimum-altered-weight incident edge per vertex ending in another color."""
    csr = g.graph
    n = csr.n_vertices
    if len(colors) != n:
        raise ValidationError("colors length must match vertex count")
    threads = resolve_threads(threads)
    positions = np.empty(n, dtype=np.int64)
    labels = colors.colors

    def scan(block):
        v0, v1 = block
        _min_edge_scan(csr.row_offsets, csr.col_indices, csr.weights, labels,
                       v0, v1, positions)

    block = max(1024, -(-n // (threads * 4)))
    run_tasks(scan, block_ranges(n, block), threads)

    found = positions >= 0
    if csr.n_edges:
        safe = np.where(found, positions, 0)
        dst = np.where(found, csr.col_indices[safe], -1)
        alt = np.where(found, csr.weights[safe], np.inf)
        orig = np.where(found, g.original_weights[safe], np.inf)
    else:
        dst = np.full(n, -1, dtype=np.int64)
        alt = np.full(n, np.inf)
        orig = np.full(n, np.inf)
    return VertexCandidates(np.arange(n, dtype=np.int64), dst, positions, alt, orig)


def min_edge_per_supervertex(candidates: VertexCandidates,
                             colors: ColorArray) -> EdgeList:
    """Reconcile per-vertex candidates to one accepted edge per color.

    An undirected edge chosen by both of its endpoint colors is emitted
    once. Returned weights are the original (pre-alteration) values.
    """
    n = len(candidates.position)
    labels = colors.colors
    best_vertex = np.full(n, -1, dtype=np.int64)
    _reconcile_per_color(candidates.position, candidates.dst,
                         candidates.altered_weight, labels, best_vertex)
    src = best_vertex[best_vertex >= 0]
    if len(src) == 0:
        return EdgeList(n, np.empty(0, np.int64), np.empty(0, np.int64), np.empty(0))
    dst = candidates.dst[src]
    w = candidates.original_weight[src]
    a = np.minimum(src, dst)
    b = np.maximum(src, dst)
    order = np.lexsort((b, a))
    a, b, w = a[order], b[order], w[order]
    keep = np.ones(len(a), dtype=bool)
    keep[1:] = (a[1:] != a[:-1]) | (b[1:] != b[:-1])
    return EdgeList(n, a[keep], b[keep], w[keep])


def label_propagation(new_edges: EdgeList, colors: ColorArray) -> ColorArray:
    """Spread the minimum color across each group joined by the new edges."""
    out = colors.colors.copy()
    if len(new_edges):
        _propagate_colors(out, new_edges.src, new_edges.dst,
                          np.empty(len(out), dtype=np.int64))
    return ColorArray(out)


def solve_mst(g: CsrGraph, maximize: bool = False, seed: int = 0, *,
              threads: int | None = None) -> MstResult:
    """Minimum (or maximum) spanning tree / forest of a symmetric graph.

    Repeats {per-vertex minimum edge, per-color reconciliation, color
    propagation} until no color finds an outgoing edge; on disconnected
    input that steady state leaves one tree per component. Output edges
    carry original weights; with maximize=True weights are negated before
    alteration and restored in the output.

    Fixed (graph, seed, maximize) gives a bit-identical result for any
    thread count.
    """
    work = g
    if maximize:
        work = CsrGraph(g.n_vertices, g.row_offsets, g.col_indices, -g.weights)
    altered = weight_alteration(work, seed)
    n = g.n_vertices
    threads = resolve_threads(threads)

    labels = ColorArray(np.arange(n, dtype=np.int64))
    acc_src: list[np.ndarray] = []
    acc_dst: list[np.ndarray] = []
    acc_w: list[np.ndarray] = []
    while True:
        cand = min_edge_per_vertex(altered, labels, threads=threads)
        batch = min_edge_per_supervertex(cand, labels)
        if len(batch) == 0:
            break
        acc_src.append(batch.src)
        acc_dst.append(batch.dst)
        acc_w.append(batch.weight)
        labels = label_propagation(batch, labels)

    if acc_src:
        src = np.concatenate(acc_src)
        dst = np.concatenate(acc_dst)
        w = np.concatenate(acc_w)
    else:
        src = np.empty(0, dtype=np.int64)
        dst = np.empty(0, dtype=np.int64)
        w = np.empty(0)
    if maximize:
        w = -w
    order = np.lexsort((dst, src))
    edges = EdgeList(n, src[order], dst[order], w[order])
    n_components = labels.n_components
    if len(edges) != n - n_components:
        raise LinkageError(
            f"internal: accepted {len(edges)} edges for {n} vertices and "
            f"{n_components} components"
        )
    return MstResult(edges, labels, n_components)
