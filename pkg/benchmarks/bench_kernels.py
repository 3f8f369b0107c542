#!/usr/bin/env python3
"""Benchmark the compiled route-search kernel against the pure-Python fallback.

Times the two hot entry points (distance columns and feasible-route searches)
over generated networks at the three size presets, using identical inputs for
both backends and checking that their outputs agree.

Usage: python benchmarks/bench_kernels.py [--queries N]
"""
import argparse
import random
import sys
import time

from pcnsim.core import TopologyKind, generate_topology
from pcnsim.kernels import pathfind_py

try:
    from pcnsim.kernels import _pathfind as compiled
except ImportError:
    compiled = None


def bench_backend(backend, net, queries, hop_cap=20):
    rng = random.Random(1234)
    pairs = [tuple(rng.sample(range(net.n), 2)) for _ in range(queries)]
    amounts = [rng.randint(10, 10_000) for _ in range(queries)]

    t0 = time.perf_counter()
    columns = {}
    for _src, dst in pairs:
        if dst not in columns:
            columns[dst] = backend.bfs_dist(net.n, net.csr_indptr, net.csr_nbr,
                                            net.csr_chan, net.open_flags, dst)
    t_bfs = time.perf_counter() - t0

    t0 = time.perf_counter()
    routes = []
    for (src, dst), amount in zip(pairs, amounts):
        routes.append(backend.feasible_route(
            net.n, net.csr_indptr, net.csr_nbr, net.csr_chan, net.csr_dir,
            net.csr_base, net.csr_ppm, net.balances, net.open_flags,
            src, dst, amount, columns[dst], hop_cap, 1_000_000))
    t_route = time.perf_counter() - t0
    return t_bfs, t_route, routes


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--queries", type=int, default=2000)
    args = parser.parse_args(argv)

    if compiled is None:
        print("compiled kernel not built; run `pip install -e .` with Cython available")

    print(f"{'size':>4} {'n':>5} {'backend':>8} {'bfs_cols':>10} {'routes':>10} "
          f"{'routes/s':>10}")
    for label, n in (("sm", 30), ("md", 200), ("lg", 1000)):
        net = generate_topology(TopologyKind.RANDOM, n, {"mean_degree": 4}, seed=42)
        results = {}
        for name, backend in (("python", pathfind_py),) + (
                (("cython", compiled),) if compiled else ()):
            t_bfs, t_route, routes = bench_backend(backend, net, args.queries)
            results[name] = routes
            print(f"{label:>4} {n:>5} {name:>8} {t_bfs:>9.3f}s {t_route:>9.3f}s "
                  f"{args.queries / t_route:>10.0f}")
        if compiled and results["python"] != results["cython"]:
            print("ERROR: backends disagree", file=sys.stderr)
            return 1
        if compiled:
            print(f"{'':>4} {'':>5} {'':>8} backends agree on all "
                  f"{args.queries} routes")
    return 0


if __name__ == "__main__":
    sys.exit(main())
