"""NumPy implementations of the clustering hot loops.

Used whenever the compiled ``_kernels`` extension is unavailable, and as the
reference the compiled kernels are tested against.
"""

import numpy as np


def swap_costs(costs, weights, d1, d2, owner, k):
    """Total cost of every single swap of the current center set.

    Args:
      costs: (m, u) per-point cost of each of the m candidates for each of the
        u distinct data points (distances, or squared distances for k-means).
      weights: (u,) multiplicity of each distinct data point.
      d1: (u,) cost to the nearest current center.
      d2: (u,) cost to the second-nearest current center (inf when k == 1).
      owner: (u,) position in the current set of the nearest center.
      k: number of current centers.

    Returns:
      (k, m) array whose entry [j, i] is the total cost after replacing the
      j-th current center by candidate i.
    """
    costs = np.asarray(costs, dtype=np.float64)
    m1 = np.minimum(costs, d1[None, :])
    base = m1 @ weights
    gain = (np.minimum(costs, d2[None, :]) - m1) * weights[None, :]
    onehot = np.zeros((costs.shape[1], k))
    onehot[np.arange(costs.shape[1]), owner] = 1.0
    return base[None, :] + (gain @ onehot).T


def subset_costs(costs, combos, weights, chunk=4096):
    """Total cost of each center subset, one subset per row of ``combos``."""
    costs = np.asarray(costs, dtype=np.float64)
    combos = np.asarray(combos, dtype=np.int64)
    out = np.empty(len(combos))
    for start in range(0, len(combos), chunk):
        block = combos[start:start + chunk]
        out[start:start + chunk] = costs[block].min(axis=1) @ weights
    return out
