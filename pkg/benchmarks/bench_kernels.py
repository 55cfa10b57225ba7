"""Time the numba kernels against their numpy fallbacks.

Run with ``python3 benchmarks/bench_kernels.py [--size M N P] [--repeat R]``.
Compilation happens once, before timing; each figure is the best of
``repeat`` runs.
"""
import argparse
import timeit

import numpy as np

from lrstv import _kernels
from lrstv._accel import HAS_NUMBA

CASES = [
    ("soft_threshold", lambda x: _kernels.soft_threshold_numpy(x, 0.1),
     lambda x: _kernels.soft_threshold_numba(x, 0.1)),
    ("forward_diff axis 0", lambda x: _kernels.forward_diff_numpy(x, 0),
     lambda x: _kernels.forward_diff_numba(x, 0)),
    ("forward_diff axis 2", lambda x: _kernels.forward_diff_numpy(x, 2),
     lambda x: _kernels.forward_diff_numba(x, 2)),
    ("diff adjoint axis 1", lambda x: _kernels.forward_diff_adjoint_numpy(x, 1),
     lambda x: _kernels.forward_diff_adjoint_numba(x, 1)),
]


def best_time(fn, x, repeat, number):
    return min(timeit.repeat(lambda: fn(x), repeat=repeat, number=number)) / number


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, nargs=3, default=[128, 128, 64])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--number", type=int, default=10)
    args = ap.parse_args(argv)

    x = np.random.default_rng(0).standard_normal(tuple(args.size))
    print(f"cube {tuple(args.size)}, best of {args.repeat} x {args.number}")
    if not HAS_NUMBA:
        print("numba not importable; only the numpy column is meaningful")
    print(f"{'kernel':<22}{'numpy ms':>10}{'numba ms':>10}{'speedup':>9}")
    for name, f_np, f_nb in CASES:
        assert np.array_equal(f_np(x), f_nb(x)), name  # also triggers compilation
        t_np = best_time(f_np, x, args.repeat, args.number)
        t_nb = best_time(f_nb, x, args.repeat, args.number)
        print(f"{name:<22}{t_np * 1e3:>10.3f}{t_nb * 1e3:>10.3f}{t_np / t_nb:>9.2f}")


if __name__ == "__main__":
    main()
