"""Exhaustive ground truth for small instances."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import mpmath
import numpy as np

from sublinear_dp import kernels
from sublinear_dp.blackbox import Objective, build_problem
from sublinear_dp.errors import EmptyCandidateSet, InstanceTooLarge, KTooLarge, ValidationError
from sublinear_dp.metric import (
    CenterRole,
    CenterSet,
    avg_cost_means,
    avg_cost_median,
    euclidean_distances,
)

MAX_ENUMERATION = 10**6
MAX_GRID_EVALUATIONS = 4 * 10**6
_CHUNK = 8192


@dataclass(frozen=True)
class OracleResult:
    optimum_centers: CenterSet
    optimum_avg_cost: float
    enumerated_count: int

    def to_json(self):
        return {
            "optimum_centers": self.optimum_centers.to_json(),
            "optimum_avg_cost": self.optimum_avg_cost,
            "enumerated_count": self.enumerated_count,
        }


def _avg(objective):
    return avg_cost_means if Objective(objective) is Objective.MEANS else avg_cost_median


def brute_force_opt(space, dataset, k, objective=Objective.MEDIAN, *, candidates=None,
                    limit=MAX_ENUMERATION):
    """Minimize the average cost over every k-subset of the candidates (V by default).

    Subsets are visited in lexicographic order, so the first minimizer found
    is the lexicographically smallest one.
    """
    problem = build_problem(space, dataset, objective, candidates)
    m = problem.m
    if not 1 <= k <= m:
        raise KTooLarge(f"k = {k} must lie in [1, {m}]")
    total = math.comb(m, k)
    if total > limit:
        raise InstanceTooLarge(f"C({m}, {k}) = {total} subsets exceeds the limit {limit}")
    best_cost, best_combo = math.inf, None
    combos = itertools.combinations(range(m), k)
    while True:
        block = np.array(list(itertools.islice(combos, _CHUNK)), dtype=np.int64)
        if block.size == 0:
            break
        costs = kernels.subset_costs(problem.costs, block.reshape(-1, k), problem.weights)
        i = int(np.argmin(costs))
        if costs[i] < best_cost:
            best_cost, best_combo = float(costs[i]), block[i]
    centers = problem.center_set(best_combo, role=CenterRole.OPTIMAL)
    # Report through the public cost function so callers comparing costs agree bit for bit.
    return OracleResult(centers, _avg(objective)(dataset, centers), total)


def brute_force_opt_median(space, dataset, k, **kw):
    return brute_force_opt(space, dataset, k, Objective.MEDIAN, **kw)


def brute_force_opt_means(space, dataset, k, **kw):
    return brute_force_opt(space, dataset, k, Objective.MEANS, **kw)


def grid_candidates(lo, hi, step):
    """Regular grid over the box [lo, hi] with spacing ``step`` per axis."""
    lo = np.atleast_1d(np.asarray(lo, dtype=np.float64))
    hi = np.atleast_1d(np.asarray(hi, dtype=np.float64))
    axes = [np.arange(a, b + step / 2, step) for a, b in zip(lo, hi)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in mesh], axis=1)


def grid_search_opt(space, dataset, k, objective=Objective.MEDIAN, step=None,
                    limit=MAX_GRID_EVALUATIONS):
    """Approximate continuous optimum in R^d (d <= 2, k <= 2) by grid search.

    The grid covers the bounding box of the dataset with spacing ``step``
    (default: dataset diameter / 1000).
    """
    if not space.is_euclidean:
        raise ValidationError("grid search needs a Euclidean space")
    if space.dimension > 2 or k > 2 or k < 1:
        raise ValidationError("grid search supports only d <= 2 and k <= 2")
    pts = dataset.coords()
    if step is None:
        step = (dataset.diameter or 1.0) / 1000.0
    grid = grid_candidates(pts.min(axis=0), pts.max(axis=0), step)
    total = math.comb(len(grid), k)
    if total > limit:
        raise InstanceTooLarge(f"{total} grid center sets exceeds the limit {limit}")
    idx, weights = dataset.distinct()
    power = Objective(objective).power
    best_cost, best = math.inf, None
    if k == 1:
        for start in range(0, len(grid), _CHUNK):
            block = euclidean_distances(grid[start:start + _CHUNK], space.points[idx]) ** power
            costs = block @ weights
            i = int(np.argmin(costs))
            if costs[i] < best_cost:
                best_cost, best = float(costs[i]), grid[start + i][None, :]
    else:
        costs = np.ascontiguousarray(euclidean_distances(grid, space.points[idx]) ** power)
        combos = itertools.combinations(range(len(grid)), 2)
        while True:
            block = np.array(list(itertools.islice(combos, _CHUNK)), dtype=np.int64)
            if block.size == 0:
                break
            c = kernels.subset_costs(costs, block, weights)
            i = int(np.argmin(c))
            if c[i] < best_cost:
                best_cost, best = float(c[i]), grid[block[i]]
    centers = CenterSet.from_coords(best, role=CenterRole.OPTIMAL)
    return OracleResult(centers, _avg(objective)(dataset, centers), total)


def em_distribution_oracle(utilities, eps, sensitivity, dps=50):
    """Exact exponential-mechanism probabilities, evaluated with mpmath."""
    u = [mpmath.mpf(float(x)) for x in utilities]
    if not u:
        raise EmptyCandidateSet("exponential mechanism needs at least one candidate")
    if not sensitivity > 0:
        raise ValidationError(f"sensitivity must be positive, got {sensitivity}")
    if math.isinf(eps):
        top = max(range(len(u)), key=lambda i: (u[i], -i))
        return [1.0 if i == top else 0.0 for i in range(len(u))]
    with mpmath.workdps(dps):
        scale = mpmath.mpf(eps) / (2 * mpmath.mpf(sensitivity))
        w = [mpmath.exp(scale * x) for x in u]
        z = mpmath.fsum(w)
        return [float(x / z) for x in w]
