"""Compare the compiled and pure-Python graph kernels.

    python benchmarks/bench_kernels.py [--preset gasket] [--level 7] [--repeat 3]
"""
import argparse
import sys
import timeit

import numpy as np

from fractalopt import _kernels
from fractalopt.graph import build_graph
from fractalopt.ifs import PRESETS, load_preset


def cases(g, u):
    args = (g.indptr, g.indices)
    w = u[g.indices] - u[g.arc_sources]
    v = np.zeros(g.n_vertices)
    out = np.empty(g.n_vertices)
    x0 = int(np.argmin(u))
    return {
        "greedy_successors": lambda k: k.greedy_successors(*args, u, g.lex_rank),
        "ascend (from argmin)": lambda k: k.ascend(*args, u, g.lex_rank, x0),
        "bellman_sweep": lambda k: k.bellman_sweep(*args, w, v, out),
        "vertex_laplacian": lambda k: k.vertex_laplacian(*args, u),
    }


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--preset", choices=PRESETS, default="gasket")
    p.add_argument("--level", type=int, default=7)
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args(argv)

    if _kernels.compiled is None:
        print("compiled kernels are not built; run `pip install -e .` with Cython available", file=sys.stderr)
        return 1
    g = build_graph(load_preset(args.preset), args.level)
    u = np.random.default_rng(0).normal(size=g.n_vertices)
    print(f"{args.preset} level {args.level}: {g.n_vertices} vertices, {len(g.indices)} CSR slots")
    print(f"{'kernel':<22}{'python [ms]':>14}{'cython [ms]':>14}{'speed-up':>10}")
    for name, fn in cases(g, u).items():
        t = {}
        for label, mod in (("python", _kernels.fallback), ("cython", _kernels.compiled)):
            timer = timeit.Timer(lambda: fn(mod))
            n, _ = timer.autorange()
            t[label] = min(timer.repeat(args.repeat, n)) / n * 1e3
        print(f"{name:<22}{t['python']:>14.3f}{t['cython']:>14.3f}{t['python'] / t['cython']:>9.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
