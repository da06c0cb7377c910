#!/usr/bin/env python3
"""Compare the compiled neighbor-search kernels against the pure fallback.

Times the shared-table neighbor pass and a full tune on synthetic data with
each available backend, and verifies the outputs are identical bit for bit.

    python benchmarks/backend_compare.py --n 20000 --p 3 --k 50
"""

import argparse
import time

import numpy as np

import loftune
from loftune import TuningGrid, build_index, neighbor_lists_up_to_k, tune, validate_dataset


def run(n: int, p: int, k: int, seed: int) -> None:
    rng = np.random.default_rng(seed)
    centers = rng.uniform(-30, 30, size=(4, p))
    counts = [n // 4] * 3 + [n - 3 * (n // 4)]
    rows = np.vstack([
        center + rng.normal(size=(count, p))
        for center, count in zip(centers, counts)
    ])
    data = validate_dataset(rows)
    grid = TuningGrid(contaminations=(0.01, 0.02),
                      neighborhood_sizes=tuple(range(10, min(k, data.n - 1) + 1, 10)))

    backends = ["pure"]
    if loftune.compiled_available():
        backends.insert(0, "compiled")
    else:
        print("compiled extension not built; timing the pure backend only")

    print(f"n={data.n} p={p} k={k} seed={seed}")
    print(f"{'backend':<10} {'index kind':<10} {'knn pass (s)':>13} {'tune (s)':>10}")
    tables = {}
    for backend in backends:
        index = build_index(data, backend=backend)
        started = time.perf_counter()
        tables[backend] = neighbor_lists_up_to_k(index, k)
        knn_seconds = time.perf_counter() - started
        started = time.perf_counter()
        tune(data, grid, backend=backend)
        tune_seconds = time.perf_counter() - started
        print(f"{backend:<10} {index.kind:<10} {knn_seconds:>13.3f} {tune_seconds:>10.3f}")

    if len(tables) == 2:
        same_ids = np.array_equal(tables["compiled"].ids, tables["pure"].ids)
        same_d = np.array_equal(tables["compiled"].distances, tables["pure"].distances)
        print(f"outputs identical: ids={same_ids} distances={same_d} (bitwise)")
        if not (same_ids and same_d):
            raise SystemExit("backend outputs diverged")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=20000)
    parser.add_argument("--p", type=int, default=3)
    parser.add_argument("--k", type=int, default=50)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    run(args.n, args.p, args.k, args.seed)


if __name__ == "__main__":
    main()
