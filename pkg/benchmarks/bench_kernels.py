"""Timing comparison of the jitted kernels against their Python sources.

Run:
    python3 benchmarks/bench_kernels.py [--repeats N]

The jitted path is what normal imports use; the Python path is the
exact same function body executed by the interpreter (the fallback
selected by NOMASIM_NO_NUMBA=1).
"""

import argparse
import time

import numpy as np

from nomasim._kernels import (NUMBA_ENABLED, lloyd_cluster, python_impl,
                              ward_merge_sequence)

ward_py = python_impl(ward_merge_sequence)
lloyd_py = python_impl(lloyd_cluster)


def _time(fn, repeats, *args):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def bench_ward(sizes, repeats):
    rows = []
    rng = np.random.default_rng(0)
    for n in sizes:
        thetas = rng.uniform(-1, 1, n)
        ward_merge_sequence(thetas)  # compile before timing
        jit = _time(ward_merge_sequence, repeats, thetas)
        py = _time(ward_py, repeats, thetas)
        rows.append((f"ward n={n}", jit, py))
    return rows


def bench_lloyd(sizes, repeats):
    rows = []
    rng = np.random.default_rng(1)
    for n, k in sizes:
        thetas = rng.uniform(-1, 1, n)
        means = thetas[rng.choice(n, k, replace=False)]
        lloyd_cluster(thetas, means.copy(), 100)
        jit = _time(lambda: lloyd_cluster(thetas, means.copy(), 100),
                    repeats)
        py = _time(lambda: lloyd_py(thetas, means.copy(), 100), repeats)
        rows.append((f"lloyd n={n} k={k}", jit, py))
    return rows


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5,
                        help="timing repeats; best run is reported")
    args = parser.parse_args()

    print(f"numba enabled: {NUMBA_ENABLED}")
    if not NUMBA_ENABLED:
        print("(set NOMASIM_NO_NUMBA=0 or install numba to compare "
              "against the compiled path)")
    rows = bench_ward([10, 100, 400], args.repeats)
    rows += bench_lloyd([(10, 2), (100, 4), (1000, 8)], args.repeats)

    print(f"\n{'case':<18}{'jitted':>14}{'python':>14}{'speedup':>9}")
    print("-" * 55)
    for name, jit, py in rows:
        print(f"{name:<18}{jit * 1e3:>12.3f}ms{py * 1e3:>12.3f}ms"
              f"{py / jit:>8.1f}x")


if __name__ == "__main__":
    main()
