#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-NumPy fallback.

Times the three hot per-instance solvers on batches of random ensemble
outputs and prints a per-kernel table with the speedup.  Run after an
editable install:

    python3 benchmarks/bench_backends.py [--instances 2000] [--members 5]
"""

import argparse
import time

import numpy as np

from credro._backend import available_backends


def random_member_batches(rng, n, m, c):
    logits = rng.normal(0.0, 1.5, size=(n, m, c))
    z = np.exp(logits - logits.max(axis=2, keepdims=True))
    return z / z.sum(axis=2, keepdims=True)


def time_kernel(fn, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench(n_instances, m):
    backends = available_backends()
    if "compiled" not in backends:
        print("compiled extension not built; nothing to compare")
    rng = np.random.default_rng(0)
    cases = {
        "waterfill C=4": ("waterfill", random_member_batches(rng, n_instances, m, 4)),
        "waterfill C=10": ("waterfill", random_member_batches(rng, n_instances, m, 10)),
        "lower-vertices C=4": ("lower", random_member_batches(rng, n_instances, m, 4)),
        "lower-vertices C=10": ("lower", random_member_batches(rng, n_instances, m, 10)),
        "lower-vertices C=14": ("lower", random_member_batches(rng, n_instances // 20, m, 14)),
        "hull-ascent C=4": ("hull", random_member_batches(rng, n_instances, m, 4)),
        "hull-ascent C=10": ("hull", random_member_batches(rng, n_instances, m, 10)),
    }

    def runner(kernels, kind, probs):
        lo = probs.min(axis=1)
        hi = probs.max(axis=1)

        def go():
            if kind == "waterfill":
                for i in range(probs.shape[0]):
                    kernels.waterfill_box(lo[i], hi[i])
            elif kind == "lower":
                for i in range(probs.shape[0]):
                    kernels.box_lower_vertices(lo[i], hi[i])
            else:
                for i in range(probs.shape[0]):
                    kernels.hull_upper_cg(probs[i], 1e-10, 10000)

        return go

    name_w = max(len(k) for k in cases)
    header = f"{'kernel':<{name_w}}  {'instances':>9}  {'python':>10}  {'compiled':>10}  {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for label, (kind, probs) in cases.items():
        row = {"python": float("nan"), "compiled": float("nan")}
        for name, kernels in backends.items():
            row[name] = time_kernel(runner(kernels, kind, probs))
        speedup = row["python"] / row["compiled"] if "compiled" in backends else float("nan")
        print(
            f"{label:<{name_w}}  {probs.shape[0]:>9}  {row['python']:>9.4f}s"
            f"  {row['compiled']:>9.4f}s  {speedup:>7.1f}x"
        )


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--instances", type=int, default=2000)
    parser.add_argument("--members", type=int, default=5)
    args = parser.parse_args()
    bench(args.instances, args.members)
