"""Command-line interface: cluster, knn, mst, verify, bench.

Exit codes are a stable contract: 0 success, 1 internal failure or
verification mismatch, 2 user or input error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import io as fileio
from . import oracles
from .core import EdgeList, LinkageError, PointMatrix, ValidationError, edge_list_to_csr
from .linkage import LinkageConfig, single_linkage
from .mst import solve_mst
from .neighbors import TileSpec, fused_knn
from .parallel import resolve_threads

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_USER = 2


@dataclass
class RunManifest:
    """Record of one CLI run: inputs, parameters, stage timings, outputs."""

    input: str
    subcommand: str
    parameters: dict
    timings_ms: dict
    outputs: list
    stats: dict = field(default_factory=dict)

    def write(self, path) -> None:
        if any(v < 0 for v in self.timings_ms.values()):
            raise LinkageError("internal: negative stage timing")
        with open(path, "w") as fh:
            json.dump(asdict(self), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _tile_from_args(args) -> TileSpec:
    return TileSpec(batch_m=args.tile_m, batch_n=args.tile_n)


def _add_io_args(p, with_input=True):
    if with_input:
        p.add_argument("--input", required=True, help="input file path")
    p.add_argument("--output-dir", default=".", help="directory for output files")


def _add_run_args(p):
    p.add_argument("--seed", type=int, default=0,
                   help="seed for all randomness (tie-breaking perturbation, data generation)")
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (default: PARLINK_THREADS env var, then cpu count)")


def _add_tile_args(p):
    p.add_argument("--tile-m", type=int, default=TileSpec().batch_m,
                   help="query rows per scan tile")
    p.add_argument("--tile-n", type=int, default=TileSpec().batch_n,
                   help="index rows per scan tile")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="parlink",
        description="Parallel single-linkage hierarchical clustering toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cluster", help="end-to-end clustering of a point matrix")
    _add_io_args(p)
    p.add_argument("--n-clusters", type=int, required=True)
    p.add_argument("--k", type=int, default=15, help="connectivity neighbors per point")
    p.add_argument("--metric", choices=["euclidean", "sqeuclidean"], default="euclidean")
    _add_run_args(p)
    _add_tile_args(p)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("knn", help="exact k nearest neighbors of every row")
    _add_io_args(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--metric", choices=["euclidean", "sqeuclidean"], default="euclidean")
    _add_run_args(p)
    _add_tile_args(p)
    p.set_defaults(func=cmd_knn)

    p = sub.add_parser("mst", help="minimum (or maximum) spanning tree of a Matrix Market graph")
    _add_io_args(p)
    p.add_argument("--maximize", action="store_true",
                   help="solve the maximum spanning tree via the additive inverse")
    p.add_argument("--verify", action="store_true",
                   help="cross-check the result against a Kruskal oracle")
    _add_run_args(p)
    p.set_defaults(func=cmd_mst)

    p = sub.add_parser("verify", help="run library-vs-oracle checks on seeded random instances")
    _add_run_args(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="per-stage timing sweeps (CSV output)")
    _add_io_args(p, with_input=False)
    p.add_argument("--sizes", default="1000,4000", help="comma-separated point counts")
    p.add_argument("--dims", default="8", help="comma-separated dimensions")
    p.add_argument("--ks", default="15", help="comma-separated neighbor counts")
    p.add_argument("--thread-counts", default="1,2", help="comma-separated thread counts")
    _add_run_args(p)
    p.set_defaults(func=cmd_bench)
    return parser


def cmd_cluster(args) -> int:
    out = fileio.ensure_dir(args.output_dir)
    data = fileio.read_matrix_auto(args.input)
    pm = PointMatrix(data)
    cfg = LinkageConfig(
        n_clusters=args.n_clusters,
        k=args.k,
        metric=args.metric,
        seed=args.seed,
        allow_large_k=args.k > 64,
    )
    threads = resolve_threads(args.threads)
    timings: dict = {}
    dendrogram, labels = single_linkage(
        pm, cfg, tile=_tile_from_args(args), threads=threads, timings=timings
    )
    labels_path = out / "labels.csv"
    dendro_path = out / "dendrogram.csv"
    fileio.write_labels_csv(labels_path, labels.labels)
    fileio.write_dendrogram_csv(dendro_path, dendrogram)
    manifest = RunManifest(
        input=str(args.input),
        subcommand="cluster",
        parameters={
            "k": cfg.k,
            "n_clusters": cfg.n_clusters,
            "metric": cfg.metric,
            "seed": cfg.seed,
            "threads": threads,
        },
        timings_ms=timings,
        outputs=[str(labels_path), str(dendro_path)],
        stats={"n_points": pm.n_rows, "n_features": pm.n_cols},
    )
    manifest.write(out / "run_manifest.json")
    print(f"clustered {pm.n_rows} points into {cfg.n_clusters} clusters")
    print(f"wrote {labels_path} and {dendro_path}")
    return EXIT_OK


def cmd_knn(args) -> int:
    out = fileio.ensure_dir(args.output_dir)
    data = fileio.read_matrix_auto(args.input)
    pm = PointMatrix(data)
    threads = resolve_threads(args.threads)
    t0 = time.perf_counter()
    knn = fused_knn(pm, args.k, _tile_from_args(args),
                    squared=args.metric == "sqeuclidean", threads=threads)
    elapsed = (time.perf_counter() - t0) * 1000.0
    idx_path = out / "knn_indices.csv"
    dist_path = out / "knn_distances.csv"
    fileio.write_knn_csvs(idx_path, dist_path, knn)
    manifest = RunManifest(
        input=str(args.input),
        subcommand="knn",
        parameters={"k": args.k, "metric": args.metric, "seed": args.seed,
                    "threads": threads},
        timings_ms={"knn": elapsed},
        outputs=[str(idx_path), str(dist_path)],
        stats={"n_points": pm.n_rows, "n_features": pm.n_cols},
    )
    manifest.write(out / "run_manifest.json")
    print(f"wrote {idx_path} and {dist_path}")
    return EXIT_OK


def cmd_mst(args) -> int:
    out = fileio.ensure_dir(args.output_dir)
    edges = fileio.read_mtx_graph(args.input)
    threads = resolve_threads(args.threads)
    t0 = time.perf_counter()
    graph = edge_list_to_csr(edges)
    result = solve_mst(graph, maximize=args.maximize, seed=args.seed, threads=threads)
    elapsed = (time.perf_counter() - t0) * 1000.0
    total = float(result.edges.weight.sum())
    mst_path = out / "mst.csv"
    fileio.write_mst_csv(mst_path, result.edges)
    manifest = RunManifest(
        input=str(args.input),
        subcommand="mst",
        parameters={"seed": args.seed, "threads": threads, "maximize": args.maximize},
        timings_ms={"mst": elapsed},
        outputs=[str(mst_path)],
        stats={
            "n_vertices": graph.n_vertices,
            "n_components": result.n_components,
            "n_edges": len(result.edges),
            "total_weight": total,
        },
    )
    manifest.write(out / "run_manifest.json")
    print(f"edges={len(result.edges)} components={result.n_components} "
          f"total_weight={total:.17g}")
    print(f"wrote {mst_path}")
    if args.verify:
        usrc, udst, uw = graph.undirected_edges()
        sign = -1.0 if args.maximize else 1.0
        ka, _, kw = oracles.kruskal_mst(graph.n_vertices, usrc, udst, sign * uw)
        oracle_total = float(sign * kw.sum())
        count_ok = len(ka) == len(result.edges)
        weight_ok = abs(total - oracle_total) <= 1e-9 * max(1.0, abs(oracle_total))
        if not (count_ok and weight_ok):
            print(f"VERIFY FAIL: oracle edges={len(ka)} total={oracle_total:.17g}",
                  file=sys.stderr)
            return EXIT_INTERNAL
        print(f"verify ok: total weight matches Kruskal within 1e-9 ({oracle_total:.17g})")
    return EXIT_OK


def _check(name: str, ok: bool, detail: str = "") -> tuple[str, bool]:
    status = "ok " if ok else "FAIL"
    line = f"{status}  {name}"
    if detail:
        line += f"  ({detail})"
    print(line)
    return name, ok


def cmd_verify(args) -> int:
    threads = resolve_threads(args.threads)
    rng = np.random.default_rng(args.seed)
    results = []

    for n, d, k in [(60, 4, 5), (220, 8, 32)]:
        x = rng.standard_normal((n, d))
        knn = fused_knn(x, k, threads=threads)
        oi, od = oracles.sorted_knn(x, k)
        ok = np.array_equal(knn.indices, oi) and np.allclose(
            knn.distances, od, rtol=1e-6, atol=1e-12
        )
        results.append(_check("knn-vs-sorted-oracle", ok, f"n={n} d={d} k={k}"))

    for n, extra in [(40, 60), (150, 500)]:
        src = rng.integers(1, n, size=extra)
        dst = rng.integers(0, src)
        w = rng.uniform(0.1, 10.0, size=extra + n - 1)
        chain = np.arange(1, n)
        all_src = np.concatenate([chain, src])
        all_dst = np.concatenate([chain - 1, dst])
        edges = EdgeList(n, all_src, all_dst, w)
        graph = edge_list_to_csr(edges)
        result = solve_mst(graph, seed=args.seed, threads=threads)
        usrc, udst, uw = graph.undirected_edges()
        _, _, kw = oracles.kruskal_mst(n, usrc, udst, uw)
        total = float(result.edges.weight.sum())
        ok = (
            len(result.edges) == n - 1
            and abs(total - float(kw.sum())) <= 1e-9 * max(1.0, abs(float(kw.sum())))
        )
        results.append(_check("mst-vs-kruskal-oracle", ok, f"V={n} E={len(edges)}"))

    for n, d, c in [(80, 3, 3), (300, 8, 5)]:
        centers = rng.uniform(-8.0, 8.0, size=(c, d))
        x = centers[rng.integers(0, c, size=n)] + 0.3 * rng.standard_normal((n, d))
        cfg = LinkageConfig(n_clusters=c, k=5, seed=args.seed)
        _, labels = single_linkage(x, cfg, threads=threads)
        _, oracle_labels = oracles.naive_single_linkage(x, c)
        ari = oracles.adjusted_rand_index(labels.labels, oracle_labels)
        results.append(_check("slink-vs-naive-oracle", ari == 1.0, f"n={n} ari={ari}"))

    failures = [name for name, ok in results if not ok]
    print(f"{len(results) - len(failures)}/{len(results)} checks passed")
    return EXIT_INTERNAL if failures else EXIT_OK


def cmd_bench(args) -> int:
    out = fileio.ensure_dir(args.output_dir)
    sizes = [int(s) for s in args.sizes.split(",") if s]
    dims = [int(s) for s in args.dims.split(",") if s]
    ks = [int(s) for s in args.ks.split(",") if s]
    thread_counts = [int(s) for s in args.thread_counts.split(",") if s]
    rng = np.random.default_rng(args.seed)
    rows = []
    for n in sizes:
        for d in dims:
            x = rng.standard_normal((n, d))
            for k in ks:
                for threads in thread_counts:
                    cfg = LinkageConfig(n_clusters=2, k=k, seed=args.seed,
                                        allow_large_k=k > 64)
                    timings: dict = {}
                    single_linkage(x, cfg, threads=threads, timings=timings)
                    for stage, ms in timings.items():
                        rows.append((stage, n, d, k, threads, ms))
    bench_path = out / "bench.csv"
    with open(bench_path, "w") as fh:
        fh.write("stage,n,d,k,threads,ms\n")
        for stage, n, d, k, threads, ms in rows:
            fh.write(f"{stage},{n},{d},{k},{threads},{ms:.3f}\n")
    print(f"wrote {bench_path}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USER
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USER
    except LinkageError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # pragma: no cover - safety net
        print(f"internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
