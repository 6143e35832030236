"""Time the compiled and pure-Python Monte Carlo kernels on the same workload.

    python3 benchmarks/bench_kernel.py [--samples 2000] [--n-star 256]

Both kernels share the random stream, so the script also checks that the
sampled costs agree bit for bit.
"""

import argparse
import time

import numpy as np

from prrtail import cli, simulator


def timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--samples", type=int, default=2000)
    ap.add_argument("--n-star", type=int, default=256)
    ap.add_argument("--benchmarks", nargs="*", default=["quickselect", "quicksort", "rdwalk", "mc4"])
    args = ap.parse_args()
    if simulator.BACKEND != "cython":
        raise SystemExit("compiled kernel not built; run pip install -e . --no-build-isolation")
    print(f"{'benchmark':<12} {'cython s':>9} {'python s':>9} {'speedup':>8}  identical")
    for name in args.benchmarks:
        prr = cli.load_benchmark(name).load_prr()
        tab = simulator.build_tables(prr, args.n_star)
        run = lambda b: simulator.sample_costs(prr, args.n_star, args.samples, 1, backend=b, tables=tab, workers=1)
        fast, tc = timed(lambda: run("cython"))
        slow, tp = timed(lambda: run("python"))
        print(f"{name:<12} {tc:9.4f} {tp:9.3f} {tp / tc:8.0f}  {np.array_equal(fast, slow)}")


if __name__ == "__main__":
    main()
