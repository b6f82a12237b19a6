"""Compare the compiled and pure-numpy cosine-moment kernels.

Usage::

    python3 benchmarks/bench_kernels.py [--nodes 2000,20000] [--nmax 1024,4096] [--repeat 3]

Prints one line per (nodes, nmax): best wall time of each backend, the
speedup, and the max abs difference between the two results.
"""
import argparse
import sys
import time

import numpy as np

from toeptrace import kernels


def best_time(fn, repeat):
    out, best = None, float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nodes", default="2000,20000")
    ap.add_argument("--nmax", default="1024,4096")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    if kernels.cosine_moments_ext is None:
        print("compiled extension not built; run: python3 setup.py build_ext --inplace",
              file=sys.stderr)
        return 1
    rng = np.random.default_rng(args.seed)
    print(f"{'nodes':>7} {'nmax':>6} {'compiled_s':>11} {'python_s':>10} {'speedup':>8} {'max_diff':>9}")
    for m in (int(v) for v in args.nodes.split(",")):
        x = rng.uniform(-np.pi, np.pi, m)
        w = rng.uniform(0, 1, m) / m
        for nmax in (int(v) for v in args.nmax.split(",")):
            tc, oc = best_time(lambda: kernels.cosine_moments_ext(x, w, nmax), args.repeat)
            tp, op = best_time(lambda: kernels.cosine_moments_py(x, w, nmax), args.repeat)
            diff = float(np.max(np.abs(oc - op)))
            print(f"{m:7d} {nmax:6d} {tc:11.4f} {tp:10.4f} {tp / tc:8.1f} {diff:9.1e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
