"""Compare the compiled and numpy kernel backends on representative workloads.

    python3 benchmarks/bench_kernels.py [--repeat N]

Each row reports the best wall time of N runs per backend, the speed-up and
the largest relative difference between the two results.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from cocycle_lab._kernels import compiled_backend, python_backend


def _inputs(rng):
    d = 2
    # near-isometries keep 20000-step chains finite
    orth = np.linalg.qr(rng.normal(size=(8, d, d)))[0]
    stack = orth * rng.uniform(0.98, 1.02, size=(8, 1, d))
    inv = np.linalg.inv(stack)
    idx = rng.integers(0, 8, size=20000)
    idx2d = rng.integers(0, 8, size=(20000, 10))
    A = np.eye(d) + 0.3 * rng.normal(size=(20000, d, d))
    Ai = np.linalg.inv(A)
    B = A[:300]
    Bi = Ai[:300]
    net_A = A[:8000]
    net_Ai = Ai[:8000]
    f1 = np.column_stack([rng.uniform(1, 2, 40), rng.uniform(-0.5, 0.5, 40),
                          rng.uniform(-0.5, 0.5, 40)])
    f2 = np.column_stack([rng.uniform(1, 2, 40), rng.uniform(-0.5, 0.5, 40),
                          rng.uniform(-0.5, 0.5, 40)])
    return {
        "chain_products": (stack, inv, idx),
        "batch_products": (stack, inv, idx2d),
        "spectral_norms": (A,),
        "gl_distances": (A, Ai, A[0], Ai[0]),
        "min_gl_distances": (A, Ai, B, Bi),
        "farthest_point_net": (net_A, net_Ai, 0.3),
        "sup_ratio_2d": (f1, f2),
    }


def _best(fn, args, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t)
    return best, out


def _diff(a, b) -> float:
    if isinstance(a, tuple):
        return max(_diff(x, y) for x, y in zip(a, b))
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if a.shape != b.shape:
        return float("inf")
    if not a.size:
        return 0.0
    return float((np.abs(a - b) / np.maximum(1.0, np.abs(b))).max())


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)
    if compiled_backend is None:
        print("compiled backend unavailable; build with `pip install -e . --no-build-isolation`")
        return 1
    work = _inputs(np.random.default_rng(args.seed))
    print(f"{'kernel':<20}{'python [ms]':>14}{'compiled [ms]':>16}{'speed-up':>10}{'max rel diff':>14}")
    for name, fargs in work.items():
        tp, op = _best(getattr(python_backend, name), fargs, args.repeat)
        tc, oc = _best(getattr(compiled_backend, name), fargs, args.repeat)
        print(f"{name:<20}{1e3 * tp:>14.2f}{1e3 * tc:>16.2f}{tp / tc:>10.1f}{_diff(op, oc):>14.2e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
