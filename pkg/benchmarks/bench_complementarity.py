"""Time the complementarity kernels: pure numpy against numba.

Usage: python3 benchmarks/bench_complementarity.py [--sizes 2 4 8] [--steps 61] [--repeat 5]

For a random Hermitian pair of each size it times the coarse grid, the
coordinate descent from the best grid point, and the two together. Times are
the best of ``--repeat`` warm runs. Both backends must return the same
minimum; the last column shows the gap.
"""
import argparse
import time

import numpy as np

from qframe import _kernels
from qframe.qalgebra import AlgebraContext, random_quantity


def best_time(fn, repeat):
    out, times = None, []
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - start)
    return min(times), out


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[2, 4, 8])
    parser.add_argument("--steps", type=int, default=61)
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    backends = {"numpy": (_kernels.grid_sigma_min_numpy, _kernels.descent_numpy)}
    if _kernels.HAVE_NUMBA:
        backends["numba"] = (_kernels.grid_sigma_min_numba, _kernels.descent_numba)
    else:
        print("numba not installed; timing the numpy kernels only")

    rng = np.random.default_rng(args.seed)
    print(f"{'n':>3} {'backend':>8} {'grid s':>9} {'descent s':>10} {'total s':>9} {'sigma_min':>20}")
    for n in args.sizes:
        ctx = AlgebraContext.matrix(n)
        f = random_quantity(ctx, rng, "hermitian").data
        g = random_quantity(ctx, rng, "hermitian").data
        r = 2 * (np.linalg.norm(f, 2) + np.linalg.norm(g, 2)) + 1
        xs = np.linspace(-r, r, args.steps)
        step = xs[1] - xs[0]
        results = {}
        for name, (grid, descent) in backends.items():
            grid(f, g, xs[:2], xs[:2])  # compile or warm up outside the timed region
            descent(f, g, 0.0, 0.0, step, 1e-2)
            t_grid, vals = best_time(lambda: grid(f, g, xs, xs), args.repeat)
            i, j = np.unravel_index(np.argmin(vals), vals.shape)
            t_desc, (_, _, best) = best_time(lambda: descent(f, g, xs[i], xs[j], step, 1e-8), args.repeat)
            results[name] = (t_grid + t_desc, best)
            print(f"{n:>3} {name:>8} {t_grid:>9.4f} {t_desc:>10.4f} {t_grid + t_desc:>9.4f} {best:>20.15g}")
        if len(results) == 2:
            ratio = results["numpy"][0] / results["numba"][0]
            gap = abs(results["numpy"][1] - results["numba"][1])
            print(f"{n:>3} {'numpy/numba total':>29} {ratio:>9.2f}   |gap| = {gap:.1e}")


if __name__ == "__main__":
    main()
