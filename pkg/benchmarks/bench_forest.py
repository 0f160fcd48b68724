#!/usr/bin/env python3
"""Compare the compiled tree kernel against the pure-Python fallback.

Both backends grow bit-identical forests from the same seed, so this is a
pure throughput comparison on the workload the sweep harness actually runs
(one-hot categorical features, shallow wide trees).

Usage: python benchmarks/bench_forest.py [--n 20000] [--trees 50] [--repeat 3]
"""

import argparse
import time

import numpy as np

from ldpfair import _forest_py
from ldpfair.forest import ForestParams, predict, train
from ldpfair.synth import synth_dataset

try:
    from ldpfair import _forest_core
except ImportError:
    _forest_core = None


def one_hot(dataset):
    attrs = [a for a in dataset.schema.attributes if a.role != "outcome"]
    features = [(a.name, cat) for a in attrs for cat in range(a.k)]
    x = np.empty((dataset.n, len(features)), dtype=np.uint8)
    for j, (name, cat) in enumerate(features):
        x[:, j] = dataset.column(name) == cat
    return x


def bench_kernel(kernel, x, y, n_trees, repeat):
    n = x.shape[0]
    seeds = np.random.SeedSequence(7).generate_state(n_trees, dtype=np.uint64)
    best = float("inf")
    nodes = 0
    for _ in range(repeat):
        start = time.perf_counter()
        nodes = 0
        for seed in seeds:
            buffers = [np.empty(2 * n + 1, np.int32) for _ in range(4)]
            count = kernel.grow_tree(x, y, *buffers, int(seed), 2**31 - 1, 2, 3, True)
            nodes += count
        best = min(best, time.perf_counter() - start)
    return best, nodes


def bench_predict(kernel, x, y, n_trees):
    n = x.shape[0]
    seeds = np.random.SeedSequence(7).generate_state(n_trees, dtype=np.uint64)
    trees = []
    for seed in seeds:
        buffers = [np.empty(2 * n + 1, np.int32) for _ in range(4)]
        count = kernel.grow_tree(x, y, *buffers, int(seed), 2**31 - 1, 2, 3, True)
        trees.append([b[:count].copy() for b in buffers])
    out = np.empty(n, dtype=np.uint8)
    start = time.perf_counter()
    for feature, left, right, label in trees:
        kernel.predict_tree(feature, left, right, label, x, out)
    return time.perf_counter() - start


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=20_000, help="records in the synthetic dataset")
    parser.add_argument("--trees", type=int, default=50, help="trees per forest")
    parser.add_argument("--repeat", type=int, default=3, help="timing repetitions, best taken")
    args = parser.parse_args()

    dataset = synth_dataset("synthetic1", "Q2", args.n, seed=3)
    x = one_hot(dataset)
    y = dataset.column("Y").astype(np.uint8)
    print(f"workload: {args.n} records, {x.shape[1]} one-hot features, {args.trees} trees\n")

    py_time, py_nodes = bench_kernel(_forest_py, x, y, args.trees, args.repeat)
    print(f"python   grow: {py_time:8.3f}s  ({py_nodes} nodes)")
    if _forest_core is not None:
        c_time, c_nodes = bench_kernel(_forest_core, x, y, args.trees, args.repeat)
        assert c_nodes == py_nodes, "backends disagree on forest structure"
        print(f"compiled grow: {c_time:8.3f}s  ({c_nodes} nodes)  speedup x{py_time / c_time:.1f}")
        py_pred = bench_predict(_forest_py, x, y, args.trees)
        c_pred = bench_predict(_forest_core, x, y, args.trees)
        print(f"python   predict: {py_pred:8.3f}s")
        print(f"compiled predict: {c_pred:8.3f}s  speedup x{py_pred / c_pred:.1f}")
    else:
        print("compiled kernel not available (install with the extension built)")

    start = time.perf_counter()
    model = train(dataset, ForestParams(n_trees=args.trees, seed=9))
    predict(model, dataset)
    print(f"\nend-to-end train+predict via selected backend: {time.perf_counter() - start:.3f}s")


if __name__ == "__main__":
    main()
