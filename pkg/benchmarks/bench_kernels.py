"""Benchmark the Monte Carlo metric kernels: numba versus the numpy fallback.

Run from the repository root after installing the package:

    python benchmarks/bench_kernels.py [n_draws]

The numbers are best-of-5 wall times for one (sum, sum of squares) pass over
n_draws paired decision values, per metric.  The numba column requires numba
to be importable and not disabled via RISKSHIFT_NUMBA=0.
"""

import sys
import time

import numpy as np

from riskshift._kernels import (
    METRIC_HINGE,
    METRIC_LOGISTIC,
    METRIC_MISCLASS,
    METRIC_SQUARED,
    kernel_backend,
    metric_sums_numba,
    metric_sums_numpy,
)

_METRICS = (
    ("squared", METRIC_SQUARED),
    ("misclassification", METRIC_MISCLASS),
    ("logistic", METRIC_LOGISTIC),
    ("hinge", METRIC_HINGE),
)


def bench(fn, z_star, z, code, repeat=5):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(z_star, z, code)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 4_000_000
    rng = np.random.default_rng(0)
    z_star = rng.standard_normal(n)
    z = rng.standard_normal(n)

    print(f"kernel backend: {kernel_backend()}; n_draws = {n}")
    if metric_sums_numba is None:
        print("numba kernel unavailable (not installed or RISKSHIFT_NUMBA=0);")
        print("timing the numpy fallback only")
    else:
        # first call compiles; keep it out of the timings
        metric_sums_numba(z_star[:8], z[:8], METRIC_SQUARED)

    header = f"{'metric':<18}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>9}"
    print(header)
    print("-" * len(header))
    for name, code in _METRICS:
        t_np = bench(metric_sums_numpy, z_star, z, code)
        if metric_sums_numba is None:
            print(f"{name:<18}{1e3 * t_np:>12.2f}{'-':>12}{'-':>9}")
            continue
        t_nb = bench(metric_sums_numba, z_star, z, code)
        s_np, _ = metric_sums_numpy(z_star, z, code)
        s_nb, _ = metric_sums_numba(z_star, z, code)
        rel = abs(s_np - s_nb) / max(abs(s_np), 1e-300)
        assert rel <= 1e-12, f"backends disagree on {name}: rel gap {rel:.3g}"
        print(f"{name:<18}{1e3 * t_np:>12.2f}{1e3 * t_nb:>12.2f}{t_np / t_nb:>9.2f}")


if __name__ == "__main__":
    main()
