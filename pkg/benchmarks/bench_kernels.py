"""Compare the numba and numpy WNLS kernels on one batched H-update.

    python benchmarks/bench_kernels.py [--sizes 64x64x4,256x256x8] [--repeat 5]

Prints the best-of-N wall time of each backend and the largest absolute
difference between their outputs. The numba timing excludes compilation.
"""

import argparse
import time

import numpy as np

from tcnmf import _kernels
from tcnmf.matrix import make_rng


def problem(m, n, r, seed=0):
    rng = make_rng(seed)
    w = rng.random((m, r))
    v = w @ rng.random((r, n))
    v[rng.random((m, n)) < 0.2] = v.max()  # salt corruption
    q = 1.0 / (1.0 + ((v - w @ rng.random((r, n))) / 0.5) ** 2)
    return w, q, v, rng.random((r, n))


def best_time(fn, args, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="64x64x4,256x100x5,512x512x8,1024x512x16")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    if not _kernels.HAVE_NUMBA:
        print("numba unavailable (or RNMF_DISABLE_NUMBA set); timing the numpy kernel only")
    print(f"{'m x n x r':>14} {'numpy [ms]':>11} {'numba [ms]':>11} {'speedup':>8} {'max |diff|':>11}")
    for spec in args.sizes.split(","):
        m, n, r = (int(x) for x in spec.split("x"))
        prob = problem(m, n, r)
        t_np, out_np = best_time(_kernels.solve_columns_numpy, prob, args.repeat)
        if _kernels.HAVE_NUMBA:
            _kernels.solve_columns_numba(*prob)  # compile / load from cache
            t_nb, out_nb = best_time(_kernels.solve_columns_numba, prob, args.repeat)
            diff = float(np.max(np.abs(out_np[0] - out_nb[0])))
            print(f"{spec:>14} {1e3 * t_np:11.2f} {1e3 * t_nb:11.2f} {t_np / t_nb:7.1f}x {diff:11.2e}")
        else:
            print(f"{spec:>14} {1e3 * t_np:11.2f} {'-':>11} {'-':>8} {'-':>11}")


if __name__ == "__main__":
    main()
