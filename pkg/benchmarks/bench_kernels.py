#!/usr/bin/env python3
"""Benchmark the compiled Lloyd kernels against the numpy fallback.

Times full k-means runs (k-means++ init plus Lloyd iterations) on Gaussian
blob mixtures at several problem sizes, once per available backend, and
prints the speedup. Run after `pip install -e . --no-build-isolation`:

    python3 benchmarks/bench_kernels.py [--quick]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from strata.cluster import kernels
from strata.cluster.kmeans import kmeans

CASES = [
    # (n, d, k) spanning detector-sized inputs up to stress sizes
    (2_000, 16, 5),
    (20_000, 32, 5),
    (100_000, 64, 8),
]
QUICK_CASES = CASES[:2]


def blob_data(n: int, d: int, k: int, rng: np.random.Generator) -> np.ndarray:
    centers = rng.normal(0, 10, size=(k, d))
    return centers[rng.integers(0, k, size=n)] + rng.normal(size=(n, d))


def time_backend(name: str, x: np.ndarray, k: int, repeats: int) -> tuple[float, float]:
    with kernels.use(name):
        kmeans(x[: min(len(x), 500)], k, seed=0)  # warm up
        best = float("inf")
        inertia = 0.0
        for _ in range(repeats):
            started = time.perf_counter()
            result = kmeans(x, k, seed=123)
            best = min(best, time.perf_counter() - started)
            inertia = result.inertia
    return best, inertia


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--quick", action="store_true", help="small cases only")
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    backends = kernels.available_backends()
    print(f"available backends: {', '.join(backends)}")
    if len(backends) < 2:
        print("compiled kernel not built; rerun after `pip install -e . --no-build-isolation`")

    cases = QUICK_CASES if args.quick else CASES
    rng = np.random.default_rng(42)
    header = f"{'n':>8} {'d':>4} {'k':>3}" + "".join(f" {b:>12}" for b in backends)
    if len(backends) == 2:
        header += f" {'speedup':>9}"
    print(header)
    for n, d, k in cases:
        x = blob_data(n, d, k, rng)
        times = {}
        inertias = {}
        for backend in backends:
            times[backend], inertias[backend] = time_backend(backend, x, k, args.repeats)
        row = f"{n:>8} {d:>4} {k:>3}" + "".join(f" {times[b] * 1e3:>10.1f}ms" for b in backends)
        if len(backends) == 2:
            row += f" {times['numpy'] / times['cython']:>8.2f}x"
            drift = abs(inertias["cython"] - inertias["numpy"]) / max(inertias.values())
            if drift > 1e-9:
                row += f"  (inertia drift {drift:.1e})"
        print(row)


if __name__ == "__main__":
    main()
