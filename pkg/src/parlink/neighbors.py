"""Brute-force nearest-neighbor engine.

Distances are computed tile by tile in the expanded form
``|x|^2 + |y|^2 - 2<x, y>`` with precomputed row norms, and the top-k /
min selection is fused into the tile scan: candidates are filtered
against the row's current k-th best before insertion and tile-local
results are folded into the global per-row state under a per-row-block
mutex. Selection uses the total order (distance, candidate id), so the
output is exact and bit-identical for every tile size and thread count.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np
from numba import njit

from .core import (
    ColorArray,
    EdgeList,
    NeighborPair,
    ValidationError,
    as_point_matrix,
)
from .parallel import block_ranges, resolve_threads, run_tasks

_I64_MAX = np.iinfo(np.int64).max


@dataclass(frozen=True)
class TileSpec:
    """Tile shape for the pairwise scan: batch_m query rows by batch_n index rows."""

    batch_m: int = 256
    batch_n: int = 2048

    def __post_init__(self):
        if self.batch_m < 1 or self.batch_n < 1:
            raise ValidationError("tile sizes must be >= 1")


@dataclass(frozen=True)
class KnnGraph:
    """Exact k-nearest-neighbor table: row i holds the k closest other points.

    Rows are sorted ascending by distance with ties broken by smaller
    neighbor id; a row never contains its own index.
    """

    indices: np.ndarray
    distances: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        dist = np.asarray(self.distances, dtype=np.float64)
        if idx.ndim != 2 or idx.shape != dist.shape:
            raise ValidationError("indices and distances must be 2-d with equal shape")
        idx.setflags(write=False)
        dist.setflags(write=False)
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "distances", dist)

    @property
    def n_rows(self) -> int:
        return self.indices.shape[0]

    @property
    def k(self) -> int:
        return self.indices.shape[1]

    def to_edge_list(self) -> EdgeList:
        """Directed neighbor edges (i, indices[i, j], distances[i, j])."""
        n, k = self.indices.shape
        src = np.repeat(np.arange(n, dtype=np.int64), k)
        return EdgeList(n, src, self.indices.ravel(), self.distances.ravel())


@njit(cache=True, nogil=True)
def _row_sq_norms(data):
    n, d = data.shape
    out = np.empty(n)
    for i in range(n):
        acc = 0.0
        for t in range(d):
            acc += data[i, t] * data[i, t]
        out[i] = acc
    return out


@njit(cache=True, nogil=True)
def _dist_tile(q, x, qnorms, xnorms, squared, out):
    m, d = q.shape
    n = x.shape[0]
    for i in range(m):
        for j in range(n):
            dot = 0.0
            for t in range(d):
                dot += q[i, t] * x[j, t]
            v = qnorms[i] + xnorms[j] - 2.0 * dot
            if v < 0.0:
                v = 0.0
            out[i, j] = v if squared else np.sqrt(v)


@njit(cache=True, nogil=True)
def _snapshot_thresholds(out_d, out_i, out_n, q0, m, k, thr_d, thr_i):
    for r in range(m):
        row = q0 + r
        if out_n[row] == k:
            thr_d[r] = out_d[row, k - 1]
            thr_i[r] = out_i[row, k - 1]
        else:
            thr_d[r] = np.inf
            thr_i[r] = _I64_MAX


@njit(cache=True, nogil=True)
def _knn_scan_tile(data, norms, q0, q1, i0, i1, k, exclude_self,
                   thr_d, thr_i, loc_d, loc_i, loc_n):
    d = data.shape[1]
    for r in range(q1 - q0):
        qi = q0 + r
        nq = norms[qi]
        td = thr_d[r]
        ti = thr_i[r]
        cnt = 0
        for ci in range(i0, i1):
            if exclude_self and ci == qi:
                continue
            dot = 0.0
            for t in range(d):
                dot += data[qi, t] * data[ci, t]
            dist = nq + norms[ci] - 2.0 * dot
            if dist < 0.0:
                dist = 0.0
            # discard candidates that cannot beat the current k-th best
            if dist > td or (dist == td and ci > ti):
                continue
            if cnt == k:
                if dist > loc_d[r, k - 1] or (dist == loc_d[r, k - 1] and ci > loc_i[r, k - 1]):
                    continue
                pos = k - 1
            else:
                pos = cnt
                cnt += 1
            while pos > 0 and (loc_d[r, pos - 1] > dist or
                               (loc_d[r, pos - 1] == dist and loc_i[r, pos - 1] > ci)):
                loc_d[r, pos] = loc_d[r, pos - 1]
                loc_i[r, pos] = loc_i[r, pos - 1]
                pos -= 1
            loc_d[r, pos] = dist
            loc_i[r, pos] = ci
            if cnt == k:
                # local k-th may now be tighter than the snapshot
                if loc_d[r, k - 1] < td or (loc_d[r, k - 1] == td and loc_i[r, k - 1] < ti):
                    td = loc_d[r, k - 1]
                    ti = loc_i[r, k - 1]
        loc_n[r] = cnt


@njit(cache=True, nogil=True)
def _knn_merge_rows(out_d, out_i, out_n, q0, loc_d, loc_i, loc_n, k, tmp_d, tmp_i):
    for r in range(loc_n.shape[0]):
        ln = loc_n[r]
        if ln == 0:
            continue
        row = q0 + r
        gn = out_n[row]
        i = 0
        j = 0
        t = 0
        while t < k and (i < gn or j < ln):
            if i < gn and (j >= ln or out_d[row, i] < loc_d[r, j] or
                           (out_d[row, i] == loc_d[r, j] and out_i[row, i] < loc_i[r, j])):
                tmp_d[t] = out_d[row, i]
                tmp_i[t] = out_i[row, i]
                i += 1
            else:
                tmp_d[t] = loc_d[r, j]
                tmp_i[t] = loc_i[r, j]
                j += 1
            t += 1
        for s in range(t):
            out_d[row, s] = tmp_d[s]
            out_i[row, s] = tmp_i[s]
        out_n[row] = t


@njit(cache=True, nogil=True)
def _nn1_scan_tile(qdata, xdata, qnorms, xnorms, q0, q1, i0, i1,
                   use_mask, mask, qcolor, xcolor, loc_d, loc_i):
    d = qdata.shape[1]
    for r in range(q1 - q0):
        qi = q0 + r
        nq = qnorms[qi]
        bd = np.inf
        bi = _I64_MAX
        qc = qcolor[qi]
        for ci in range(i0, i1):
            if use_mask:
                if not mask[qi, ci]:
                    continue
            elif qc == xcolor[ci]:
                continue
            dot = 0.0
            for t in range(d):
                dot += qdata[qi, t] * xdata[ci, t]
            dist = nq + xnorms[ci] - 2.0 * dot
            if dist < 0.0:
                dist = 0.0
            if dist < bd or (dist == bd and ci < bi):
                bd = dist
                bi = ci
        loc_d[r] = bd
        loc_i[r] = bi


@njit(cache=True, nogil=True)
def _nn1_merge_rows(best_d, best_i, q0, loc_d, loc_i):
    for r in range(loc_d.shape[0]):
        row = q0 + r
        if loc_d[r] < best_d[row] or (loc_d[r] == best_d[row] and loc_i[r] < best_i[row]):
            best_d[row] = loc_d[r]
            best_i[row] = loc_i[r]


def pairwise_l2_tile(queries, index, squared: bool = True) -> np.ndarray:
    """Dense distance tile between two point sets.

    Uses the expanded form with precomputed norms; negative rounding
    artifacts are clamped to zero before the optional square root.
    """
    q = as_point_matrix(queries).data
    x = as_point_matrix(index).data
    if q.shape[1] != x.shape[1]:
        raise ValidationError(
            f"feature dimensions differ: {q.shape[1]} vs {x.shape[1]}"
        )
    out = np.empty((q.shape[0], x.shape[0]))
    _dist_tile(q, x, _row_sq_norms(q), _row_sq_norms(x), squared, out)
    return out


def fused_knn(x, k: int, tile: TileSpec | None = None, *,
              squared: bool = True, threads: int | None = None) -> KnnGraph:
    """Exact k nearest neighbors of every row of x among the other rows.

    Args:
        x: point matrix (N x d), all values finite.
        k: neighbors per row, 1 <= k <= N - 1.
        tile: scan tile shape; the result is independent of it.
        squared: report squared L2 distances (the pipeline default) or
            their square roots.
        threads: worker threads; defaults to PARLINK_THREADS or cpu count.

    Returns:
        KnnGraph with rows sorted ascending by (distance, neighbor id).
    """
    pm = as_point_matrix(x)
    data = pm.data
    n = pm.n_rows
    if not 1 <= k <= n - 1:
        raise ValidationError(f"k must be in [1, {n - 1}] for {n} points, got {k}")
    tile = tile or TileSpec()
    threads = resolve_threads(threads)

    norms = _row_sq_norms(data)
    out_d = np.full((n, k), np.inf)
    out_i = np.full((n, k), -1, dtype=np.int64)
    out_n = np.zeros(n, dtype=np.int64)
    qranges = block_ranges(n, tile.batch_m)
    iranges = block_ranges(n, tile.batch_n)
    locks = [threading.Lock() for _ in qranges]

    def scan(task):
        qidx, (i0, i1) = task
        q0, q1 = qranges[qidx]
        m = q1 - q0
        thr_d = np.empty(m)
        thr_i = np.empty(m, dtype=np.int64)
        with locks[qidx]:
            _snapshot_thresholds(out_d, out_i, out_n, q0, m, k, thr_d, thr_i)
        loc_d = np.empty((m, k))
        loc_i = np.empty((m, k), dtype=np.int64)
        loc_n = np.zeros(m, dtype=np.int64)
        _knn_scan_tile(data, norms, q0, q1, i0, i1, k, True, thr_d, thr_i, loc_d, loc_i, loc_n)
        tmp_d = np.empty(k)
        tmp_i = np.empty(k, dtype=np.int64)
        with locks[qidx]:
            _knn_merge_rows(out_d, out_i, out_n, q0, loc_d, loc_i, loc_n, k, tmp_d, tmp_i)

    run_tasks(scan, [(qi, ir) for qi in range(len(qranges)) for ir in iranges], threads)

    if not squared:
        out_d = np.sqrt(out_d)
    return KnnGraph(out_i, out_d)


def _fused_1nn_arrays(qdata, xdata, *, mask=None, qcolor=None, xcolor=None,
                      squared=True, tile=None, threads=None):
    """Shared 1-NN driver; admissibility comes from a dense mask or colors."""
    nq, nx = qdata.shape[0], xdata.shape[0]
    tile = tile or TileSpec()
    threads = resolve_threads(threads)
    use_mask = mask is not None
    if use_mask:
        mask = np.ascontiguousarray(mask, dtype=np.bool_)
        # colors are ignored on the mask path but the kernel still indexes them
        qcolor = np.zeros(nq, dtype=np.int64)
        xcolor = np.zeros(nx, dtype=np.int64)
        qnorms = _row_sq_norms(qdata)
        xnorms = _row_sq_norms(xdata)
    else:
        mask = np.zeros((0, 0), dtype=np.bool_)
        if qcolor is None:
            # no constraint: give queries a color no candidate can match
            qcolor = np.full(nq, -1, dtype=np.int64)
            xcolor = np.zeros(nx, dtype=np.int64)
        qnorms = _row_sq_norms(qdata)
        xnorms = qnorms if xdata is qdata else _row_sq_norms(xdata)

    best_d = np.full(nq, np.inf)
    best_i = np.full(nq, _I64_MAX, dtype=np.int64)
    qranges = block_ranges(nq, tile.batch_m)
    iranges = block_ranges(nx, tile.batch_n)
    locks = [threading.Lock() for _ in qranges]

    def scan(task):
        qidx, (i0, i1) = task
        q0, q1 = qranges[qidx]
        m = q1 - q0
        loc_d = np.empty(m)
        loc_i = np.empty(m, dtype=np.int64)
        _nn1_scan_tile(qdata, xdata, qnorms, xnorms, q0, q1, i0, i1,
                       use_mask, mask, qcolor, xcolor, loc_d, loc_i)
        with locks[qidx]:
            _nn1_merge_rows(best_d, best_i, q0, loc_d, loc_i)

    run_tasks(scan, [(qi, ir) for qi in range(len(qranges)) for ir in iranges], threads)

    missing = np.nonzero(best_i == _I64_MAX)[0]
    if len(missing):
        raise ValidationError(f"query row {missing[0]} has no admissible candidate")
    if not squared:
        best_d = np.sqrt(best_d)
    return best_i, best_d


def fused_1nn(queries, index, mask: np.ndarray | None = None, *,
              squared: bool = True, tile: TileSpec | None = None,
              threads: int | None = None) -> list[NeighborPair]:
    """Single nearest admissible candidate per query row, fused with the scan.

    mask, when given, is a boolean (n_queries x n_index) admissibility
    matrix; every query must admit at least one candidate. Ties are broken
    by smaller candidate id. No full distance matrix is materialized.
    """
    q = as_point_matrix(queries).data
    x = as_point_matrix(index).data
    if q.shape[1] != x.shape[1]:
        raise ValidationError(
            f"feature dimensions differ: {q.shape[1]} vs {x.shape[1]}"
        )
    if mask is not None and mask.shape != (q.shape[0], x.shape[0]):
        raise ValidationError(
            f"mask shape {mask.shape} does not match ({q.shape[0]}, {x.shape[0]})"
        )
    idx, dist = _fused_1nn_arrays(q, x, mask=mask, squared=squared,
                                  tile=tile, threads=threads)
    return [NeighborPair(int(i), float(d)) for i, d in zip(idx, dist)]


def cross_color_1nn(x, colors: ColorArray, *, squared: bool = True,
                    tile: TileSpec | None = None,
                    threads: int | None = None) -> EdgeList:
    """Nearest neighbor of each point among points of a different color.

    This is the reconnection query: the 1-NN scan with the color-inequality
    mask. Emits one directed edge (i, j, distance) per point.
    """
    pm = as_point_matrix(x)
    labels = colors.colors
    if len(labels) != pm.n_rows:
        raise ValidationError("colors length must match point count")
    if len(np.unique(labels)) < 2:
        raise ValidationError("graph is already connected: only one color present")
    idx, dist = _fused_1nn_arrays(pm.data, pm.data, qcolor=labels, xcolor=labels,
                                  squared=squared, tile=tile, threads=threads)
    return EdgeList(pm.n_rows, np.arange(pm.n_rows, dtype=np.int64), idx, dist)
