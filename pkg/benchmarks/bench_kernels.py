"""Compare the numba loop kernels with their numpy counterparts.

Run with ``python3 benchmarks/bench_kernels.py``.  Each kernel is called once
to trigger compilation, results of the two implementations are checked for
equality, then the best of ``--repeat`` timings is reported.
"""
import argparse
import time

import numpy as np

from flagcodes import kernels
from flagcodes._accel import HAVE_NUMBA
from flagcodes.codes import code_derived
from flagcodes.gfq import gf


def best_time(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cases(rng):
    F2, F3, F9 = gf(2), gf(3), gf(9)
    yield "rref 64x64 GF(3)", ("rref", (rng.integers(0, 3, (64, 64)), *F3.tables))
    yield "rref 48x48 GF(9)", ("rref", (rng.integers(0, 9, (48, 48)), *F9.tables))
    yield "batch_rank 20000 x 6x6 GF(2)", ("batch_rank", (rng.integers(0, 2, (20000, 6, 6)), *F2.tables))
    A, B = rng.integers(0, 3, (96, 96)), rng.integers(0, 3, (96, 96))
    yield "matmul 96x96 GF(3)", ("matmul", (A, B, F3.add_t, F3.mul_t))
    code = code_derived(6, 2, 2)
    bases, dims = code.bases, np.asarray(code.type.dims, dtype=np.int64)
    yield f"pairwise_min_distance derived(6,2,2) {len(code)} words", (
        "pairwise_min_distance", (bases, dims, *F2.tables))
    Y = bases[7]
    yield "error_counts derived(6,2,2)", ("error_counts", (bases, dims, Y, dims, *F2.tables))


def same(a, b) -> bool:
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    return np.array_equal(np.asarray(a), np.asarray(b))


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args(argv)
    if not HAVE_NUMBA:
        print("numba is not installed; the loop kernels run as plain Python")
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':50s} {'loop [ms]':>10s} {'numpy [ms]':>11s} {'speedup':>8s}")
    for label, (name, call_args) in cases(rng):
        loop = getattr(kernels, f"{name}_loop")
        vec = getattr(kernels, f"{name}_numpy")
        if not same(loop(*call_args), vec(*call_args)):
            raise SystemExit(f"{label}: loop and numpy kernels disagree")
        t_loop = best_time(lambda: loop(*call_args), args.repeat)
        t_vec = best_time(lambda: vec(*call_args), args.repeat)
        print(f"{label:50s} {t_loop * 1e3:10.2f} {t_vec * 1e3:11.2f} {t_vec / t_loop:7.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
