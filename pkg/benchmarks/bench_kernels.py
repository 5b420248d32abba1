"""Time the numba kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--n 2000] [--d 4] [--repeat 3]

Each kernel is called once before timing so compilation is excluded.
Results from the two paths are compared and the max absolute difference
is printed alongside the timings.
"""
import argparse
import time

import numpy as np

from wodkit import _accel
from wodkit.kernels import NUMBA_KERNELS, NUMPY_KERNELS


def cases(n, d, rng):
    X = rng.normal(size=(n, d))
    C = rng.normal(size=(8, d))
    small = X[: min(n, 300)]  # abod is cubic
    return {
        "sq_dists_to_centers": (X, C),
        "knn_mean_dist": (X, 5),
        "neighbor_counts": (X, 0.5),
        "abod_raw": (small,),
    }


def best_of(fn, args, repeat):
    fn(*args)
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t)
    return best


def run(n=2000, d=4, repeat=3, seed=0):
    rng = np.random.default_rng(seed)
    rows = []
    for name, args in cases(n, d, rng).items():
        t_np = best_of(NUMPY_KERNELS[name], args, repeat)
        out_np = NUMPY_KERNELS[name](*args)
        if _accel.HAVE_NUMBA:
            t_nb = best_of(NUMBA_KERNELS[name], args, repeat)
            diff = float(np.max(np.abs(np.asarray(NUMBA_KERNELS[name](*args), float) - np.asarray(out_np, float))))
        else:
            t_nb, diff = None, None
        rows.append((name, t_np, t_nb, diff))
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--d", type=int, default=4)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    print(f"n={args.n} d={args.d} numba available: {_accel.HAVE_NUMBA}")
    print(f"{'kernel':<22}{'numpy s':>11}{'numba s':>11}{'speedup':>9}{'max diff':>11}")
    for name, t_np, t_nb, diff in run(args.n, args.d, args.repeat):
        if t_nb is None:
            print(f"{name:<22}{t_np:>11.4f}{'-':>11}{'-':>9}{'-':>11}")
        else:
            print(f"{name:<22}{t_np:>11.4f}{t_nb:>11.4f}{t_np / t_nb:>8.1f}x{diff:>11.2g}")


if __name__ == "__main__":
    main()
