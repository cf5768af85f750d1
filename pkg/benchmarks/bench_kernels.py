"""Time each kernel under both backends, plus one end-to-end sweep.

    python3 benchmarks/bench_kernels.py [--repeat 5]

The end-to-end part re-runs itself in a subprocess with STAIRCASE_ACCEL set,
since the backend is fixed at import.
"""
import argparse
import os
import subprocess
import sys
import time

import numpy as np

from staircase import kernels


def best_of(fn, repeat):
    fn()  # warm-up, includes jit compilation
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases():
    rng = np.random.default_rng(0)
    levels = np.unique(rng.integers(0, 10**6, 20_000)).astype(np.int64)
    offsets = (np.arange(200, dtype=np.int64) * (10**6 + 7))
    fine = kernels.refine_numpy(levels, offsets)
    query = rng.integers(0, fine[-1], 2_000_000).astype(np.int64)
    ind = rng.random(200_000) < 0.1
    spacers = np.arange(9, dtype=np.int64)
    b = rng.random(1_000_000) < 0.3
    a = rng.random(1_000_000) < 0.3
    return {
        "refine 20k x 200": (lambda impl: impl(levels, offsets), kernels.refine_numba, kernels.refine_numpy),
        "descend 4M": (lambda impl: impl(fine, offsets, 10**6), kernels.descend_numba, kernels.descend_numpy),
        "count_in_sorted 2M in 4M": (lambda impl: impl(query, fine), kernels.count_in_sorted_numba,
                                     kernels.count_in_sorted_numpy),
        "stack 200k x 9": (lambda impl: impl(ind, spacers), kernels.stack_numba, kernels.stack_numpy),
        "shifted_overlap 1M": (lambda impl: impl(a, b, 1234), kernels.shifted_overlap_numba,
                               kernels.shifted_overlap_numpy),
    }


SWEEP = """
import time
from fractions import Fraction
from staircase import Affine, ConstructionParams, LevelSet, Probability, build_stage_table, mixing_sweep
t = build_stage_table(ConstructionParams(1, Affine(1, 1)), 8)
B = LevelSet(2, [0])
mixing_sweep(t, B, B, [4], 4, 1, Probability(), Fraction(1, 2**20))
t0 = time.perf_counter()
mixing_sweep(t, B, B, [5, 7], 64, 7, Probability(t.deepest.total), Fraction(1, 2**20))
print(time.perf_counter() - t0)
"""


def sweep_time(backend):
    env = dict(os.environ, STAIRCASE_ACCEL=backend)
    out = subprocess.run([sys.executable, "-c", SWEEP], env=env, capture_output=True, text=True, check=True)
    return float(out.stdout.strip())


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not kernels.HAVE_NUMBA:
        sys.exit("numba is not importable; nothing to compare")
    print(f"{'kernel':<28}{'numba ms':>10}{'numpy ms':>10}{'speedup':>9}")
    for name, (call, nb, npy) in cases().items():
        assert np.array_equal(np.asarray(call(nb), dtype=object), np.asarray(call(npy), dtype=object)) \
            if not isinstance(call(nb), tuple) else all(
                np.array_equal(x, y) for x, y in zip(call(nb), call(npy)))
        t_nb = best_of(lambda: call(nb), args.repeat)
        t_np = best_of(lambda: call(npy), args.repeat)
        print(f"{name:<28}{t_nb * 1e3:>10.2f}{t_np * 1e3:>10.2f}{t_np / t_nb:>8.1f}x")
    nb, npy = sweep_time("numba"), sweep_time("numpy")
    print(f"{'sweep stages 5,7 (64 each)':<28}{nb * 1e3:>10.1f}{npy * 1e3:>10.1f}{npy / nb:>8.1f}x")


if __name__ == "__main__":
    main()
