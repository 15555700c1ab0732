"""Throughput comparison of the jitted and numpy kernel backends.

Runs the same workloads through both implementations, checks the results
match bit for bit, and prints a timing table. Invoke directly:

    python3 benchmarks/bench_backends.py [--quick]
"""

import argparse
import sys
import time

import numpy as np

from hyperperc.backends import _numpy_impl as numpy_impl
from hyperperc.backends._purepy import TWO53

try:
    from hyperperc.backends import _numba_impl as numba_impl
except ImportError:
    numba_impl = None


def _timeit(fn, *args, repeat=3):
    best = float("inf")
    result = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, result


def workloads(quick: bool):
    m = 10 ** 5 if quick else 10 ** 6
    sites = np.random.default_rng(0).integers(
        -10 ** 6, 10 ** 6, size=(m, 3)).astype(np.int64)
    ranks = np.array([0, 1, 2], dtype=np.int64)
    thrs = np.array([0.9 * TWO53, 0.8 * TWO53, 0.7 * TWO53])
    proj = np.array([[0, 1], [0, 2], [1, 2]], dtype=np.int64)
    pair_a = np.array([0, 0, 1], dtype=np.int64)
    pair_b = np.array([1, 2, 2], dtype=np.int64)
    th85 = np.array([0.85 * TWO53] * 3)
    cells = np.array([(i, j) for i in range(-2, 3) for j in range(-2, 3)],
                     dtype=np.int64)
    th99 = np.array([0.99 * TWO53] * 3)
    trials = 200 if quick else 2000
    box_trials = 2000 if quick else 20000

    yield ("plane_bits x" + str(m),
           lambda impl: impl.plane_bits(7, 1, 0.8, sites[:, :2]))
    yield ("site_open_bits x" + str(m),
           lambda impl: impl.site_open_bits(7, ranks, thrs, proj, sites))
    yield (f"explore trials={trials} (K=8, M=32)",
           lambda impl: impl.count_boundary_trials(
               7, 1, 0, trials, 3, pair_a, pair_b, ranks, th85, 8, 32,
               True))
    yield (f"box all-open trials={box_trials} (R=2)",
           lambda impl: impl.count_box_allopen_trials(
               7, 2, 0, box_trials, ranks, th99, cells))
    yield ("crossing identity scan (2x2x2 box)",
           lambda impl: impl.bt_identity_violations(2, 2, 2))


def main(argv=None):
    parser = argparse.ArgumentParser()
    parser.add_argument("--quick", action="store_true",
                        help="smaller workloads")
    args = parser.parse_args(argv)

    if numba_impl is None:
        print("numba backend unavailable; nothing to compare")
        return 1
    numba_impl.warmup()

    header = f"{'workload':42s} {'numba':>10s} {'numpy':>10s} {'speedup':>8s}"
    print(header)
    print("-" * len(header))
    for name, runner in workloads(args.quick):
        t_nb, r_nb = _timeit(runner, numba_impl)
        t_np, r_np = _timeit(runner, numpy_impl,
                             repeat=1 if not args.quick else 2)
        if isinstance(r_nb, np.ndarray):
            same = bool((r_nb == r_np).all())
        else:
            same = r_nb == r_np
        if not same:
            print(f"{name}: BACKEND MISMATCH {r_nb!r} vs {r_np!r}")
            return 2
        print(f"{name:42s} {t_nb * 1e3:9.1f}ms {t_np * 1e3:9.1f}ms "
              f"{t_np / t_nb:7.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
