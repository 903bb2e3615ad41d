"""Selects the compiled kernels when built, the NumPy ones otherwise.

Set ``SUBLINEAR_DP_PURE_PYTHON=1`` to force the fallback.
"""

import os

import numpy as np

from sublinear_dp import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if not os.environ.get("SUBLINEAR_DP_PURE_PYTHON"):
    try:
        from sublinear_dp import _kernels as _compiled
    except ImportError:
        pass
    else:
        BACKEND = "cython"
        _impl = _compiled


def nearest_two(current_costs):
    """Nearest and second-nearest cost per point from a (k, u) cost block.

    Returns (d1, d2, owner) where ``owner`` is the row of the nearest center,
    lowest row on ties; d2 is +inf when there is a single center.
    """
    current_costs = np.asarray(current_costs, dtype=np.float64)
    owner = np.argmin(current_costs, axis=0).astype(np.int64)
    cols = np.arange(current_costs.shape[1])
    d1 = current_costs[owner, cols]
    if current_costs.shape[0] == 1:
        d2 = np.full_like(d1, np.inf)
    else:
        masked = current_costs.copy()
        masked[owner, cols] = np.inf
        d2 = masked.min(axis=0)
    return d1, d2, owner


def swap_costs(costs, weights, d1, d2, owner, k, impl=None):
    impl = impl or _impl
    return impl.swap_costs(
        np.ascontiguousarray(costs, dtype=np.float64),
        np.ascontiguousarray(weights, dtype=np.float64),
        np.ascontiguousarray(d1, dtype=np.float64),
        np.ascontiguousarray(d2, dtype=np.float64),
        np.ascontiguousarray(owner, dtype=np.int64),
        int(k),
    )


def subset_costs(costs, combos, weights, impl=None):
    impl = impl or _impl
    return impl.subset_costs(
        np.ascontiguousarray(costs, dtype=np.float64),
        np.ascontiguousarray(combos, dtype=np.int64),
        np.ascontiguousarray(weights, dtype=np.float64),
    )
