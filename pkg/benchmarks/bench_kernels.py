"""Benchmark the compiled kernels against the pure-Python fallback.

Times the cyclic-Jacobi eigensolver and the isometry subset scan on both
backends and reports the speedup. Run:

    python benchmarks/bench_kernels.py [--quick]
"""

import argparse
import time

import numpy as np

from orthoreg.backend import get_kernels


def rand_symmetric(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n))
    return (a + a.T) / 2.0


def best_of(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        tic = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - tic)
    return best


def bench_jacobi(kernels, n, repeats):
    a = rand_symmetric(n, 42)
    kernels.jacobi_eigh(a, 1e-12, 100, True)  # warmup
    return best_of(lambda: kernels.jacobi_eigh(a, 1e-12, 100, True), repeats)


def bench_rip(kernels, n_cols, k, repeats):
    rng = np.random.default_rng(7)
    w = rng.standard_normal((n_cols + 2, n_cols))
    g = w.T @ w
    kernels.rip_enumerate(g, k, 10 ** 7, 1e-12, 100)  # warmup
    return best_of(lambda: kernels.rip_enumerate(g, k, 10 ** 7, 1e-12, 100),
                   repeats)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--quick", action="store_true",
                        help="smaller sizes, fewer repeats")
    args = parser.parse_args()

    py = get_kernels("python")
    try:
        comp = get_kernels("compiled")
    except ImportError:
        comp = None
        print("compiled kernels unavailable; timing the fallback only\n")

    jacobi_sizes = (8, 24) if args.quick else (8, 32, 96, 192)
    rip_cases = ((10, 3),) if args.quick else ((12, 4), (16, 5))
    repeats = 3 if args.quick else 5

    header = f"{'kernel':<28} {'python':>12} {'compiled':>12} {'speedup':>9}"
    print(header)
    print("-" * len(header))

    for n in jacobi_sizes:
        t_py = bench_jacobi(py, n, repeats)
        if comp:
            t_c = bench_jacobi(comp, n, repeats)
            print(f"jacobi_eigh n={n:<15} {t_py * 1e3:>10.3f}ms "
                  f"{t_c * 1e3:>10.3f}ms {t_py / t_c:>8.1f}x")
        else:
            print(f"jacobi_eigh n={n:<15} {t_py * 1e3:>10.3f}ms {'-':>12}")

    for n_cols, k in rip_cases:
        t_py = bench_rip(py, n_cols, k, repeats)
        label = f"rip_enumerate n={n_cols} k={k}"
        if comp:
            t_c = bench_rip(comp, n_cols, k, repeats)
            print(f"{label:<28} {t_py * 1e3:>10.3f}ms "
                  f"{t_c * 1e3:>10.3f}ms {t_py / t_c:>8.1f}x")
        else:
            print(f"{label:<28} {t_py * 1e3:>10.3f}ms {'-':>12}")


if __name__ == "__main__":
    main()
