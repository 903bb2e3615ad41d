"""Compare the compiled and pure-Python kernels on a swap-cost table and a subset sweep.

    python benchmarks/bench_kernels.py [--m 2000] [--u 1900] [--k 5] [--repeat 5]
"""

import argparse
import itertools
import timeit

import numpy as np

from sublinear_dp import _kernels_py, kernels

try:
    from sublinear_dp import _kernels
except ImportError:
    _kernels = None


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--m", type=int, default=2000, help="candidate centers")
    parser.add_argument("--u", type=int, default=1900, help="distinct data points")
    parser.add_argument("--k", type=int, default=5)
    parser.add_argument("--subset-n", type=int, default=40)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    costs = rng.random((args.m, args.u))
    weights = rng.integers(1, 5, args.u).astype(float)
    d1, d2, owner = kernels.nearest_two(costs[: args.k])
    small = rng.random((args.subset_n, args.u))
    combos = np.array(list(itertools.combinations(range(args.subset_n), 3)), dtype=np.int64)

    impls = [("python", _kernels_py)] + ([("cython", _kernels)] if _kernels else [])
    print(f"active backend: {kernels.BACKEND}")
    results = {}
    for name, impl in impls:
        swap = min(timeit.repeat(lambda: kernels.swap_costs(costs, weights, d1, d2, owner, args.k, impl=impl),
                                 number=1, repeat=args.repeat))
        subset = min(timeit.repeat(lambda: kernels.subset_costs(small, combos, weights, impl=impl),
                                   number=1, repeat=args.repeat))
        results[name] = (swap, subset)
        print(f"{name:>7}  swap_costs {args.k}x{args.m}x{args.u}: {swap * 1e3:8.2f} ms   "
              f"subset_costs {len(combos)} triples: {subset * 1e3:8.2f} ms")
    if "cython" in results:
        py, cy = results["python"], results["cython"]
        print(f"speedup  swap_costs {py[0] / cy[0]:.1f}x   subset_costs {py[1] / cy[1]:.1f}x")


if __name__ == "__main__":
    main()
