"""Benchmark the compiled solver core against the pure-NumPy fallback.

Times solve() on batches of randomly drawn subproblems at the shapes the
two-stage exchange actually produces (few blocks, moderate dimension, one
power group per AP, one sensing halfspace), once through the compiled
extension and once with force_numpy=True. Run:

    python3 benchmarks/bench_solver.py [--repeat 5]
"""
import argparse
import time

import numpy as np

from cfisac.solver import (
    LinearConstraint,
    QuadGroup,
    SubproblemSpec,
    core_backend,
    solve,
)


def rand_instance(rng, n_blocks, dim):
    c = [rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
         for _ in range(n_blocks)]
    a = [rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
         for _ in range(n_blocks)]
    q = rng.uniform(0.3, 2.0, size=n_blocks)
    groups = [QuadGroup(tuple(range(n_blocks)), tuple(q), 1.0)]
    vmax = np.sqrt(groups[0].bound
                   * sum(np.vdot(ab, ab).real / w
                         for ab, w in zip(a, q)))
    lin = LinearConstraint(a=a, t=float(rng.uniform(0.2, 0.8)) * vmax)
    return SubproblemSpec(c=c, quad_groups=groups, lin=lin)


def bench(specs, force_numpy, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        for spec in specs:
            solve(spec, force_numpy=force_numpy)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=5,
                        help="timing repetitions, best-of (default 5)")
    parser.add_argument("--batch", type=int, default=2000,
                        help="instances per shape (default 2000)")
    args = parser.parse_args()

    print(f"active backend: {core_backend()}")
    shapes = [(2, 31, "local stage (K blocks, null-space dim)"),
              (4, 2, "central stage (M blocks of K weights)"),
              (8, 31, "joint baseline (MK blocks)")]
    rng = np.random.default_rng(7)
    header = f"{'shape':<38} {'compiled':>12} {'numpy':>12} {'speedup':>9}"
    print(header)
    print("-" * len(header))
    for n_blocks, dim, label in shapes:
        specs = [rand_instance(rng, n_blocks, dim)
                 for _ in range(args.batch)]
        t_fast = bench(specs, force_numpy=False, repeat=args.repeat)
        t_numpy = bench(specs, force_numpy=True, repeat=args.repeat)
        us_fast = 1e6 * t_fast / args.batch
        us_numpy = 1e6 * t_numpy / args.batch
        print(f"{label:<38} {us_fast:>9.1f} us {us_numpy:>9.1f} us "
              f"{t_numpy / t_fast:>8.2f}x")
    if core_backend() != "cython":
        print("note: compiled core unavailable, both columns ran the "
              "numpy fallback")


if __name__ == "__main__":
    main()
