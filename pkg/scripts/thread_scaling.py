#!/usr/bin/env python3
"""Measure how the k-NN stage scales with worker threads.

Usage: python scripts/thread_scaling.py [--n 20000] [--d 16] [--k 15]
"""

import argparse
import time

import numpy as np

from parlink.neighbors import fused_knn


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=20_000)
    ap.add_argument("--d", type=int, default=16)
    ap.add_argument("--k", type=int, default=15)
    ap.add_argument("--threads", default="1,2,4,8")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    x = np.random.default_rng(args.seed).standard_normal((args.n, args.d))
    fused_knn(x[:256], min(args.k, 100), threads=1)  # warm the jit

    base = None
    print(f"n={args.n} d={args.d} k={args.k}")
    print("threads  seconds  speedup")
    for threads in [int(t) for t in args.threads.split(",")]:
        t0 = time.perf_counter()
        fused_knn(x, args.k, threads=threads)
        dt = time.perf_counter() - t0
        base = base or dt
        print(f"{threads:7d}  {dt:7.2f}  {base / dt:6.2f}x")


if __name__ == "__main__":
    main()
