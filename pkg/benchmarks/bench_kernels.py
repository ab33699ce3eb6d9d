"""Time the compiled Sturm kernels against the pure-Python twin.

Run with ``python benchmarks/bench_kernels.py [--n 1801 --repeat 5]``.
"""

import argparse
import timeit

import numpy as np

from hardy_lt import _kernels_py, build_grid, gaussian_bump, ProblemParams
from hardy_lt.spectral import discretize_channel

try:
    from hardy_lt import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None


def pencil(n):
    grid = build_grid(-12.0, 6.0, n)
    V = gaussian_bump(grid, 0.0, 1.0)
    V = V.with_values(V.values * 5.0)
    op = discretize_channel(V, 0, ProblemParams(3))
    return op.diag, op.offdiag, op.weight


def bench(mod, a, e, b, repeat, k):
    lo = -1e3
    t_count = min(timeit.repeat(lambda: mod.sturm_count(a, e, b, -0.1), number=20, repeat=repeat)) / 20
    t_bisect = min(timeit.repeat(lambda: mod.bisect_eigenvalues(a, e, b, lo, 0.0, k, 0.0),
                                 number=1, repeat=repeat))
    return t_count, t_bisect


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, nargs="+", default=[401, 1801, 4001])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    print(f"{'n':>6} {'backend':>9} {'sturm_count [s]':>16} {'bisection [s]':>14} {'speedup':>8}")
    for n in args.n:
        a, e, b = pencil(n)
        k = max(1, _kernels_py.sturm_count(a, e, b, 0.0))
        py = bench(_kernels_py, a, e, b, args.repeat, k)
        print(f"{n:6d} {'python':>9} {py[0]:16.3e} {py[1]:14.3e} {'':>8}")
        if _compiled is not None:
            c = bench(_compiled, a, e, b, args.repeat, k)
            lam_py = np.asarray(_kernels_py.bisect_eigenvalues(a, e, b, -1e3, 0.0, k, 0.0))
            lam_c = np.asarray(_compiled.bisect_eigenvalues(a, e, b, -1e3, 0.0, k, 0.0))
            assert np.array_equal(lam_py, lam_c), "backends disagree"
            print(f"{n:6d} {'compiled':>9} {c[0]:16.3e} {c[1]:14.3e} {py[1] / c[1]:7.0f}x")


if __name__ == "__main__":
    main()
