"""Shared data containers and graph format conversions.

Everything here is immutable after construction: arrays are marked
read-only so instances can be shared freely across worker threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np


class LinkageError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(LinkageError, ValueError):
    """Invalid user input: bad parameters, malformed data, broken preconditions."""


class ConvergenceError(LinkageError):
    """An iterative stage failed to reach its fixed point within its budget."""


class NeighborPair(NamedTuple):
    """A (vertex id, distance) pair, the unit of nearest-neighbor reductions."""

    index: int
    distance: float


def _frozen_array(values, dtype) -> np.ndarray:
    arr = np.ascontiguousarray(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class PointMatrix:
    """Dense row-major N x d feature matrix.

    All values must be finite; NaN or Inf is rejected at construction.
    """

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 2:
            raise ValidationError(f"point matrix must be 2-d, got shape {arr.shape}")
        if not np.isfinite(arr).all():
            raise ValidationError("point matrix contains non-finite values")
        object.__setattr__(self, "data", _frozen_array(arr, np.float64))

    @property
    def n_rows(self) -> int:
        return self.data.shape[0]

    @property
    def n_cols(self) -> int:
        return self.data.shape[1]


def as_point_matrix(x) -> PointMatrix:
    """Coerce an array-like or PointMatrix to a validated PointMatrix."""
    if isinstance(x, PointMatrix):
        return x
    return PointMatrix(np.asarray(x))


@dataclass(frozen=True)
class EdgeList:
    """Weighted undirected graph stored as parallel (src, dst, weight) arrays.

    Self loops are rejected at construction; both orientations of an edge
    may be present (conversion to CSR deduplicates by minimum weight).
    """

    n_vertices: int
    src: np.ndarray
    dst: np.ndarray
    weight: np.ndarray

    def __post_init__(self):
        src = np.asarray(self.src, dtype=np.int64).ravel()
        dst = np.asarray(self.dst, dtype=np.int64).ravel()
        weight = np.asarray(self.weight, dtype=np.float64).ravel()
        if not (len(src) == len(dst) == len(weight)):
            raise ValidationError("src, dst and weight must have equal length")
        if self.n_vertices < 0:
            raise ValidationError("n_vertices must be non-negative")
        if len(src):
            lo = min(src.min(), dst.min())
            hi = max(src.max(), dst.max())
            if lo < 0 or hi >= self.n_vertices:
                raise ValidationError(
                    f"vertex id out of range [0, {self.n_vertices}): saw {lo if lo < 0 else hi}"
                )
            loops = np.nonzero(src == dst)[0]
            if len(loops):
                raise ValidationError(f"self-loop edge at position {loops[0]} (vertex {src[loops[0]]})")
        object.__setattr__(self, "src", _frozen_array(src, np.int64))
        object.__setattr__(self, "dst", _frozen_array(dst, np.int64))
        object.__setattr__(self, "weight", _frozen_array(weight, np.float64))

    @classmethod
    def from_pairs(cls, n_vertices: int, edges) -> "EdgeList":
        """Build from an iterable of (src, dst, weight) triples."""
        triples = list(edges)
        if not triples:
            empty = np.empty(0)
            return cls(n_vertices, empty, empty, empty)
        src, dst, weight = zip(*triples)
        return cls(n_vertices, np.asarray(src), np.asarray(dst), np.asarray(weight))

    def __len__(self) -> int:
        return len(self.src)

    def iter_edges(self) -> Iterator[tuple[int, int, float]]:
        for s, d, w in zip(self.src, self.dst, self.weight):
            yield int(s), int(d), float(w)


@dataclass(frozen=True)
class CsrGraph:
    """Symmetric weighted graph in compressed sparse row form.

    row_offsets has length n_vertices + 1; col_indices and weights hold the
    directed edge endpoints, so a symmetric graph stores each undirected
    edge twice.
    """

    n_vertices: int
    row_offsets: np.ndarray
    col_indices: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        offs = np.asarray(self.row_offsets, dtype=np.int64).ravel()
        cols = np.asarray(self.col_indices, dtype=np.int64).ravel()
        w = np.asarray(self.weights, dtype=np.float64).ravel()
        if len(offs) != self.n_vertices + 1:
            raise ValidationError("row_offsets must have length n_vertices + 1")
        if offs[0] != 0 or offs[-1] != len(cols) or np.any(np.diff(offs) < 0):
            raise ValidationError("row_offsets must be non-decreasing from 0 to n_edges")
        if len(cols) != len(w):
            raise ValidationError("col_indices and weights must have equal length")
        if len(cols) and (cols.min() < 0 or cols.max() >= self.n_vertices):
            raise ValidationError("column index out of range")
        object.__setattr__(self, "row_offsets", _frozen_array(offs, np.int64))
        object.__setattr__(self, "col_indices", _frozen_array(cols, np.int64))
        object.__setattr__(self, "weights", _frozen_array(w, np.float64))

    @property
    def n_edges(self) -> int:
        """Directed entry count (twice the undirected edge count when symmetric)."""
        return len(self.col_indices)

    def row_sources(self) -> np.ndarray:
        """Source vertex of every directed entry, aligned with col_indices."""
        return np.repeat(np.arange(self.n_vertices, dtype=np.int64), np.diff(self.row_offsets))

    def is_symmetric(self) -> bool:
        """True iff entry (i, j, w) exists whenever (j, i, w) does."""
        src = self.row_sources()
        fwd = np.lexsort((self.col_indices, src))
        rev = np.lexsort((src, self.col_indices))
        return (
            np.array_equal(src[fwd], self.col_indices[rev])
            and np.array_equal(self.col_indices[fwd], src[rev])
            and np.array_equal(self.weights[fwd], self.weights[rev])
        )

    def undirected_edges(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """The deduplicated (src < dst) undirected edge arrays."""
        src = self.row_sources()
        keep = src < self.col_indices
        return src[keep], self.col_indices[keep], self.weights[keep]


@dataclass(frozen=True)
class ColorArray:
    """Per-vertex component label (supervertex color).

    Canonical form: each color value equals the minimum vertex id in its
    component.
    """

    colors: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.colors, dtype=np.int64).ravel()
        if len(arr) and (arr.min() < 0 or arr.max() >= len(arr)):
            raise ValidationError("color values must be vertex ids in range")
        object.__setattr__(self, "colors", _frozen_array(arr, np.int64))

    def __len__(self) -> int:
        return len(self.colors)

    @property
    def n_components(self) -> int:
        return len(np.unique(self.colors))


@dataclass(frozen=True)
class Dendrogram:
    """Merge table in linkage-matrix layout.

    Row i records (child_a, child_b, distance, size) and creates parent id
    i + n_points; original points are ids 0..n_points-1 with size 1.
    """

    n_points: int
    merges: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.merges, dtype=np.float64)
        n = self.n_points
        if m.shape != (max(n - 1, 0), 4):
            raise ValidationError(f"expected {n - 1} merge rows of 4 columns, got shape {m.shape}")
        if n >= 2:
            children = m[:, :2].astype(np.int64)
            if children.min() < 0 or children.max() >= 2 * n - 1:
                raise ValidationError("child id out of range")
            flat = children.ravel()
            if len(np.unique(flat)) != len(flat):
                raise ValidationError("a node id appears more than once as a child")
            if not np.isin(np.arange(n), flat).all():
                raise ValidationError("every original point must appear as a child")
            if np.any(np.diff(m[:, 2]) < 0):
                raise ValidationError("merge distances must be non-decreasing")
            sizes = np.concatenate([np.ones(n), m[:, 3]])
            expect = sizes[children[:, 0]] + sizes[children[:, 1]]
            if not np.array_equal(m[:, 3], expect):
                raise ValidationError("merge sizes must equal the sum of child sizes")
        object.__setattr__(self, "merges", _frozen_array(m, np.float64))

    @property
    def child_a(self) -> np.ndarray:
        return self.merges[:, 0].astype(np.int64)

    @property
    def child_b(self) -> np.ndarray:
        return self.merges[:, 1].astype(np.int64)

    @property
    def distances(self) -> np.ndarray:
        return self.merges[:, 2]

    @property
    def sizes(self) -> np.ndarray:
        return self.merges[:, 3].astype(np.int64)


def canonical_edge_key(src: int, dst: int) -> tuple[int, int]:
    """Direction-independent key of an undirected edge: (min, max)."""
    if src == dst:
        raise ValidationError(f"self-loop edge ({src}, {dst}) has no canonical key")
    return (src, dst) if src < dst else (dst, src)


def edge_list_to_csr(g: EdgeList) -> CsrGraph:
    """Convert an edge list to symmetric CSR.

    Both orientations of every input edge are materialized and duplicate
    (src, dst) pairs collapse to their minimum weight, which preserves the
    minimum spanning tree under single-linkage semantics.
    """
    if len(g) == 0:
        offs = np.zeros(g.n_vertices + 1, dtype=np.int64)
        return CsrGraph(g.n_vertices, offs, np.empty(0, np.int64), np.empty(0))
    src = np.concatenate([g.src, g.dst])
    dst = np.concatenate([g.dst, g.src])
    w = np.concatenate([g.weight, g.weight])
    # sort by (src, dst, weight) so the first entry of each pair is the minimum
    order = np.lexsort((w, dst, src))
    src, dst, w = src[order], dst[order], w[order]
    first = np.ones(len(src), dtype=bool)
    first[1:] = (src[1:] != src[:-1]) | (dst[1:] != dst[:-1])
    src, dst, w = src[first], dst[first], w[first]
    counts = np.bincount(src, minlength=g.n_vertices)
    offs = np.zeros(g.n_vertices + 1, dtype=np.int64)
    np.cumsum(counts, out=offs[1:])
    return CsrGraph(g.n_vertices, offs, dst, w)
