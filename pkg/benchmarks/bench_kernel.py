"""Benchmark the compiled solver kernel against the pure-Python fallback.

Generates seeded random parity games of growing size, runs both kernels on
identical CSR inputs, checks the outputs are bit-identical and reports the
timings.  Run as ``python benchmarks/bench_kernel.py [--sizes 200,1000,...]``.
"""
import argparse
import random
import time

import numpy as np

from elgames._kernel import pure
from elgames.arena import arena_csr
from elgames.randgen import rand_parity_game

try:
    from elgames._kernel import _speedups as compiled
except ImportError:
    compiled = None


def encode(pg):
    ids, indptr, indices, rev_indptr, rev_indices, owner = arena_csr(pg.arena)
    priority = np.fromiter((pg.priority[v] for v in ids), dtype=np.int64,
                           count=len(ids))
    return indptr, indices, rev_indptr, rev_indices, owner, priority


def run(kernel, args, repeats):
    best = float("inf")
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = kernel.solve_parity(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", default="100,400,1600,6400")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--repeats", type=int, default=3)
    opts = ap.parse_args()
    sizes = [int(s) for s in opts.sizes.split(",")]

    if compiled is None:
        print("compiled kernel not available; showing pure timings only")
    print(f"{'n':>7} {'pure [ms]':>12} {'compiled [ms]':>14} {'speedup':>9}")
    rng = random.Random(opts.seed)
    for n in sizes:
        pg = rand_parity_game(rng, n, max_priority=6)
        args = encode(pg)
        t_pure, out_pure = run(pure, args, opts.repeats)
        if compiled is None:
            print(f"{n:>7} {1e3 * t_pure:>12.2f} {'-':>14} {'-':>9}")
            continue
        t_comp, out_comp = run(compiled, args, opts.repeats)
        same = all((np.asarray(a) == np.asarray(b)).all()
                   for a, b in zip(out_pure, out_comp))
        if not same:
            raise SystemExit(f"kernel outputs differ at n={n}")
        print(f"{n:>7} {1e3 * t_pure:>12.2f} {1e3 * t_comp:>14.2f} "
              f"{t_pure / t_comp:>8.1f}x")
    print("outputs identical across kernels")


if __name__ == "__main__":
    main()
