"""Timing comparison of the jitted kernels against the pure-numpy fallback.

Run with:  python benchmarks/bench_kernels.py [--points N]

Both code paths live in netsteer.kernels, so they are benchmarked in one
process; the dispatched entry points pick the jitted versions whenever
numba is importable and NETSTEER_NO_NUMBA is unset.
"""

import argparse
import time

import numpy as np

from netsteer import kernels


def timeit(fn, *args, repeat=20):
    fn(*args)  # warm up (includes jit compilation)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--points", type=int, default=200000,
                        help="sphere-lattice size for both kernels")
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    a = rng.normal(size=3) * 0.3
    t = rng.normal(size=(3, 3)) * 0.3
    xs = kernels.fibonacci_sphere(args.points)
    axes = np.ascontiguousarray(rng.normal(size=(6, 3)))
    us = kernels.fibonacci_sphere(args.points)

    print(f"numba enabled: {kernels.NUMBA_ENABLED}   lattice: {args.points} points")
    rows = [
        (
            "criterion_values",
            timeit(kernels._criterion_values_numpy, a, t, 0.4, xs),
            timeit(kernels._criterion_values_numba, a, t, 0.4, xs)
            if kernels.NUMBA_ENABLED else None,
        ),
        (
            "lhs_bound",
            timeit(kernels._lhs_bound_numpy, axes, us),
            timeit(kernels._lhs_bound_numba, axes, us)
            if kernels.NUMBA_ENABLED else None,
        ),
    ]
    print(f"{'kernel':<20}{'numpy':>12}{'numba':>12}{'speedup':>10}")
    for name, t_np, t_nb in rows:
        if t_nb is None:
            print(f"{name:<20}{t_np * 1e3:>10.3f}ms{'n/a':>12}{'n/a':>10}")
        else:
            print(
                f"{name:<20}{t_np * 1e3:>10.3f}ms{t_nb * 1e3:>10.3f}ms"
                f"{t_np / t_nb:>9.2f}x"
            )

    # cross-check: both paths must agree to machine precision
    if kernels.NUMBA_ENABLED:
        dev = np.max(np.abs(
            kernels._criterion_values_numpy(a, t, 0.4, xs)
            - kernels._criterion_values_numba(a, t, 0.4, xs)
        ))
        dev = max(dev, abs(
            kernels._lhs_bound_numpy(axes, us) - kernels._lhs_bound_numba(axes, us)
        ))
        print(f"max cross-path deviation: {dev:.3e}")


if __name__ == "__main__":
    main()
