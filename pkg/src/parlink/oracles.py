"""Independent reference implementations for verification.

Everything here deliberately avoids the main pipeline's code paths:
distances come from direct difference summation rather than the expanded
form, the spanning tree comes from Kruskal's algorithm rather than the
color-based solver, and the reference merge table uses its own plain
union-find. These are the oracles the test suite and the `verify`
subcommand compare against.
"""

from __future__ import annotations

import numpy as np
from numba import njit


def sq_dists_direct(queries, index, chunk: int = 256) -> np.ndarray:
    """Full squared-distance matrix by direct summation of differences."""
    q = np.asarray(queries, dtype=np.float64)
    x = np.asarray(index, dtype=np.float64)
    out = np.empty((len(q), len(x)))
    for s in range(0, len(q), chunk):
        e = min(s + chunk, len(q))
        diff = q[s:e, None, :] - x[None, :, :]
        out[s:e] = np.einsum("ijk,ijk->ij", diff, diff)
    return out


def sorted_knn(x, k: int, squared: bool = True):
    """k nearest neighbors per row via full matrix and explicit sorting."""
    x = np.asarray(x, dtype=np.float64)
    n = len(x)
    dmat = sq_dists_direct(x, x)
    np.fill_diagonal(dmat, np.inf)
    ids = np.arange(n)
    indices = np.empty((n, k), dtype=np.int64)
    distances = np.empty((n, k))
    for i in range(n):
        order = np.lexsort((ids, dmat[i]))[:k]
        indices[i] = order
        distances[i] = dmat[i, order]
    if not squared:
        distances = np.sqrt(distances)
    return indices, distances


def argmin_masked(queries, index, mask=None, squared: bool = True):
    """Per-query admissible minimum over a materialized distance matrix."""
    dmat = sq_dists_direct(queries, index)
    if mask is not None:
        dmat = np.where(mask, dmat, np.inf)
    ids = np.arange(dmat.shape[1])
    indices = np.empty(dmat.shape[0], dtype=np.int64)
    for i in range(dmat.shape[0]):
        indices[i] = np.lexsort((ids, dmat[i]))[0]
    distances = dmat[np.arange(dmat.shape[0]), indices]
    if not squared:
        distances = np.sqrt(distances)
    return indices, distances


@njit(cache=True)
def _kruskal_accept(src, dst, n):
    parent = np.arange(n)
    size = np.ones(n, dtype=np.int64)
    keep = np.zeros(len(src), dtype=np.bool_)
    for e in range(len(src)):
        a = src[e]
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        b = dst[e]
        while parent[b] != b:
            parent[b] = parent[parent[b]]
            b = parent[b]
        if a == b:
            continue
        if size[a] < size[b]:
            a, b = b, a
        parent[b] = a
        size[a] += size[b]
        keep[e] = True
    return keep


def kruskal_mst(n_vertices: int, src, dst, weight):
    """Kruskal spanning forest: edges sorted by (weight, canonical key).

    Returns (src, dst, weight) arrays of accepted edges in merge order.
    """
    src = np.asarray(src, dtype=np.int64)
    dst = np.asarray(dst, dtype=np.int64)
    weight = np.asarray(weight, dtype=np.float64)
    a = np.minimum(src, dst)
    b = np.maximum(src, dst)
    order = np.lexsort((b, a, weight))
    a, b, weight = a[order], b[order], weight[order]
    keep = _kruskal_accept(a, b, n_vertices)
    return a[keep], b[keep], weight[keep]


def reference_linkage_rows(src, dst, weight, n: int) -> np.ndarray:
    """Sequential merge-table construction from edges already in merge order."""
    uf = list(range(n))

    def find(v):
        while uf[v] != v:
            uf[v] = uf[uf[v]]
            v = uf[v]
        return v

    cluster = {i: i for i in range(n)}
    size = {i: 1 for i in range(n)}
    rows = np.empty((n - 1, 4))
    for i, (s, d, w) in enumerate(zip(src, dst, weight)):
        ra, rb = find(int(s)), find(int(d))
        if ra == rb:
            raise ValueError("edges contain a cycle")
        ca, cb = cluster[ra], cluster[rb]
        rows[i] = (min(ca, cb), max(ca, cb), w, size[ra] + size[rb])
        uf[rb] = ra
        cluster[ra] = n + i
        size[ra] = size[ra] + size[rb]
    return rows


def component_labels(n: int, src, dst) -> np.ndarray:
    """Canonical partition labels of the graph's connected components."""
    uf = list(range(n))

    def find(v):
        while uf[v] != v:
            uf[v] = uf[uf[v]]
            v = uf[v]
        return v

    for s, d in zip(src, dst):
        ra, rb = find(int(s)), find(int(d))
        if ra != rb:
            uf[rb] = ra
    roots = np.asarray([find(v) for v in range(n)])
    return np.unique(roots, return_inverse=True)[1]


def naive_single_linkage(x, n_clusters: int, metric: str = "euclidean"):
    """Full-matrix single-linkage reference.

    Builds every pairwise distance, runs Kruskal over all edges, folds the
    accepted edges into a reference merge table, and labels clusters by
    dropping the top n_clusters - 1 merges and taking components.

    Returns (merge_rows, labels); labels are a canonical partition.
    """
    x = np.asarray(x, dtype=np.float64)
    n = len(x)
    dmat = sq_dists_direct(x, x)
    iu, ju = np.triu_indices(n, 1)
    w = dmat[iu, ju]
    if metric == "euclidean":
        w = np.sqrt(w)
    msrc, mdst, mw = kruskal_mst(n, iu, ju, w)
    rows = reference_linkage_rows(msrc, mdst, mw, n)
    keep = n - n_clusters
    labels = component_labels(n, msrc[:keep], mdst[:keep])
    return rows, labels


def adjusted_rand_index(labels_a, labels_b) -> float:
    """Adjusted Rand index between two partitions; 1.0 iff identical."""
    a = np.asarray(labels_a).ravel()
    b = np.asarray(labels_b).ravel()
    if len(a) != len(b):
        raise ValueError("partitions must label the same points")
    n = len(a)
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    na = int(ai.max()) + 1
    nb = int(bi.max()) + 1
    cont = np.bincount(ai * nb + bi, minlength=na * nb).reshape(na, nb)

    def comb2(v):
        return v * (v - 1) // 2

    sum_cells = int(comb2(cont).sum())
    sum_rows = int(comb2(cont.sum(axis=1)).sum())
    sum_cols = int(comb2(cont.sum(axis=0)).sum())
    total = comb2(n)
    if total == 0:
        return 1.0
    expected = sum_rows * sum_cols / total
    max_index = (sum_rows + sum_cols) / 2
    if max_index == expected:
        return 1.0
    return (sum_cells - expected) / (max_index - expected)
