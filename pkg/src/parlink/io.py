"""File formats for the command-line tools.

Matrices travel as header-free numeric CSV or as a raw binary layout
(magic "SLNK", u32 version, u32 rows, u32 cols, f32 little-endian
row-major payload). Graphs arrive in Matrix Market coordinate format.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np
import scipy.io
import scipy.sparse

from .core import EdgeList, ValidationError

MATRIX_MAGIC = b"SLNK"
MATRIX_VERSION = 1
_HEADER = struct.Struct("<4sIII")


def write_matrix_binary(path, data) -> None:
    arr = np.ascontiguousarray(data, dtype=np.float32)
    if arr.ndim != 2:
        raise ValidationError(f"matrix must be 2-d, got shape {arr.shape}")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MATRIX_MAGIC, MATRIX_VERSION, arr.shape[0], arr.shape[1]))
        fh.write(arr.astype("<f4").tobytes())


def read_matrix_binary(path) -> np.ndarray:
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) != _HEADER.size:
            raise ValidationError(f"{path}: truncated header at offset {len(header)}")
        magic, version, rows, cols = _HEADER.unpack(header)
        if magic != MATRIX_MAGIC:
            raise ValidationError(f"{path}: bad magic {magic!r} at offset 0")
        if version != MATRIX_VERSION:
            raise ValidationError(f"{path}: unsupported version {version}")
        payload = fh.read()
    expected = rows * cols * 4
    if len(payload) != expected:
        raise ValidationError(
            f"{path}: payload is {len(payload)} bytes at offset {_HEADER.size}, "
            f"expected {expected}"
        )
    arr = np.frombuffer(payload, dtype="<f4").reshape(rows, cols)
    return arr.astype(np.float64)


def read_matrix_csv(path) -> np.ndarray:
    try:
        arr = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    except ValueError:
        _diagnose_csv(path)
        raise
    return arr


def _diagnose_csv(path) -> None:
    """Re-scan a CSV that numpy rejected to report the offending line."""
    width = None
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            fields = line.split(",")
            if width is None:
                width = len(fields)
            elif len(fields) != width:
                raise ValidationError(
                    f"{path}: line {lineno} has {len(fields)} fields, expected {width}"
                )
            for col, field in enumerate(fields, start=1):
                try:
                    float(field)
                except ValueError:
                    raise ValidationError(
                        f"{path}: line {lineno}, field {col}: not a number: {field!r}"
                    ) from None
    raise ValidationError(f"{path}: malformed CSV matrix")


def read_matrix_auto(path) -> np.ndarray:
    """Sniff the binary magic, otherwise parse as CSV."""
    with open(path, "rb") as fh:
        head = fh.read(4)
    if head == MATRIX_MAGIC:
        return read_matrix_binary(path)
    return read_matrix_csv(path)


def write_matrix_csv(path, data) -> None:
    np.savetxt(path, np.asarray(data), delimiter=",", fmt="%.17g")


def read_mtx_graph(path) -> EdgeList:
    """Matrix Market coordinate file as an undirected edge list.

    Symmetric inputs are expanded by scipy; general inputs keep both
    directions here and are symmetrized by the min-weight rule during CSR
    conversion.
    """
    try:
        mat = scipy.io.mmread(str(path))
    except Exception as exc:
        raise ValidationError(f"{path}: not a readable Matrix Market file: {exc}") from None
    if not scipy.sparse.issparse(mat):
        raise ValidationError(f"{path}: expected a coordinate (sparse) matrix")
    coo = mat.tocoo()
    if coo.shape[0] != coo.shape[1]:
        raise ValidationError(f"{path}: adjacency matrix must be square, got {coo.shape}")
    return EdgeList(coo.shape[0], coo.row.astype(np.int64), coo.col.astype(np.int64),
                    coo.data.astype(np.float64))


def write_labels_csv(path, labels) -> None:
    np.savetxt(path, np.asarray(labels, dtype=np.int64), fmt="%d")


def write_dendrogram_csv(path, dendrogram) -> None:
    m = dendrogram.merges
    with open(path, "w") as fh:
        for i in range(m.shape[0]):
            fh.write(f"{int(m[i, 0])},{int(m[i, 1])},{m[i, 2]:.17g},{int(m[i, 3])}\n")


def write_knn_csvs(indices_path, distances_path, knn) -> None:
    np.savetxt(indices_path, knn.indices, delimiter=",", fmt="%d")
    np.savetxt(distances_path, knn.distances, delimiter=",", fmt="%.17g")


def write_mst_csv(path, edges: EdgeList) -> None:
    with open(path, "w") as fh:
        for s, d, w in zip(edges.src, edges.dst, edges.weight):
            fh.write(f"{s},{d},{w:.17g}\n")


def ensure_dir(path) -> Path:
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p
