"""Clustering black boxes: exponential-mechanism local search and baselines.

All black boxes share one calling convention,
``box(space, dataset, rng) -> CenterSet``, and carry a :class:`BlackBoxMeta`
describing their (alpha, gamma) approximation and (eps, delta) privacy, which
is all the subsampling pipeline needs to know about them.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from sublinear_dp import kernels
from sublinear_dp.errors import (
    EmptyCandidateSet,
    EmptyDataset,
    InvalidPrivacySpec,
    KTooLarge,
    ValidationError,
)
from sublinear_dp.metric import CenterRole, CenterSet, euclidean_distances
from sublinear_dp.privacy import PrivacySpec

NON_PRIVATE = math.inf

# Best-known non-private approximation ratios, for reference only.
BEST_KNOWN_RATIO_MEDIAN = 2.633
BEST_KNOWN_RATIO_MEANS = 6.358


class Objective(enum.Enum):
    MEDIAN = "median"
    MEANS = "means"

    @property
    def power(self):
        return 2 if self is Objective.MEANS else 1


class Algorithm(enum.Enum):
    DP_LOCAL_SEARCH = "dp-local-search"
    LOCAL_SEARCH = "local-search"
    ORACLE = "oracle"


@dataclass(frozen=True)
class BlackBoxMeta:
    """Approximation and privacy guarantee of a clustering black box.

    ``gamma`` is in total-cost units. ``eps = inf`` marks a non-private box.
    """

    alpha: float
    gamma: float = 0.0
    eps: float = NON_PRIVATE
    delta: float = 0.0
    objective: Objective = Objective.MEDIAN

    def __post_init__(self):
        if not self.alpha >= 1:
            raise ValidationError(f"alpha must be >= 1, got {self.alpha}")
        if not self.gamma >= 0:
            raise ValidationError(f"gamma must be >= 0, got {self.gamma}")
        if not self.eps > 0:
            raise InvalidPrivacySpec(f"eps must be positive, got {self.eps}")
        if not 0 <= self.delta < 1:
            raise InvalidPrivacySpec(f"delta must lie in [0, 1), got {self.delta}")
        object.__setattr__(self, "objective", Objective(self.objective))

    @property
    def is_private(self):
        return math.isfinite(self.eps)

    def privacy_spec(self):
        return PrivacySpec(self.eps, self.delta)

    def to_json(self):
        return {
            "alpha": self.alpha,
            "gamma": self.gamma,
            "eps": self.eps if self.is_private else "inf",
            "delta": self.delta,
            "objective": self.objective.value,
        }


def default_rounds(k, n_candidates):
    return math.ceil(10 * k * math.log(n_candidates + 1))


# ---------------------------------------------------------------- mechanism

def _em_log_weights(utilities, eps, sensitivity):
    u = np.asarray(utilities, dtype=np.float64).reshape(-1)
    if u.size == 0:
        raise EmptyCandidateSet("exponential mechanism needs at least one candidate")
    if not sensitivity > 0:
        raise ValidationError(f"sensitivity must be positive, got {sensitivity}")
    if not eps > 0:
        raise InvalidPrivacySpec(f"eps must be positive, got {eps}")
    if math.isinf(eps):
        return u, None
    return u, eps * (u - u.max()) / (2.0 * sensitivity)


def em_probabilities(utilities, eps, sensitivity):
    """Selection probabilities of the exponential mechanism (float64)."""
    u, logw = _em_log_weights(utilities, eps, sensitivity)
    if math.isinf(eps):
        p = np.zeros(u.size)
        p[int(np.argmax(u))] = 1.0
        return p
    w = np.exp(logw)
    return w / w.sum()


def exponential_mechanism(utilities, eps, sensitivity, rng, size=None):
    """Pick index i with probability proportional to exp(eps u_i / (2 sensitivity)).

    ``eps = inf`` degenerates to argmax with ties going to the lowest index.
    Weights are shifted by the maximum utility so nothing overflows. With
    ``size`` set, returns that many independent draws as an int array.
    """
    u, logw = _em_log_weights(utilities, eps, sensitivity)
    if math.isinf(eps):
        best = int(np.argmax(u))
        return best if size is None else np.full(size, best, dtype=np.int64)
    cdf = np.cumsum(np.exp(logw))
    if size is None:
        r = rng.random() * cdf[-1]
        return min(int(np.searchsorted(cdf, r, side="right")), u.size - 1)
    r = rng.random(size) * cdf[-1]
    return np.minimum(np.searchsorted(cdf, r, side="right"), u.size - 1)


# ------------------------------------------------------------ local search

@dataclass
class _Problem:
    """Cost block between candidate centers and the distinct data points."""

    space: object
    costs: np.ndarray        # (m, u)
    weights: np.ndarray      # (u,)
    cand_indices: np.ndarray | None
    cand_coords: np.ndarray | None
    radius: float            # bound on any candidate-to-point distance

    @property
    def m(self):
        return self.costs.shape[0]

    def total_cost(self, chosen):
        return float(self.costs[list(chosen)].min(axis=0) @ self.weights)

    def center_set(self, chosen, role=CenterRole.BLACK_BOX_OUTPUT, **extra):
        chosen = list(chosen)
        if self.cand_indices is not None:
            cs = CenterSet.from_indices(self.space, self.cand_indices[chosen], role)
        else:
            cs = CenterSet.from_coords(self.cand_coords[chosen], role)
        cs.extra.update(extra)
        return cs


def build_problem(space, dataset, objective, candidates=None):
    """Precompute the candidate-by-point cost block.

    ``candidates`` defaults to all of V. It may be an index array into V or,
    for Euclidean spaces, an (m, d) array of arbitrary public points.
    """
    if dataset.size == 0:
        raise EmptyDataset("cannot cluster an empty dataset")
    objective = Objective(objective)
    idx, weights = dataset.distinct()
    cand_indices = cand_coords = None
    radius = space.diameter
    if candidates is None:
        cand_indices = np.arange(space.n)
    else:
        arr = np.asarray(candidates)
        if arr.ndim == 1 and np.issubdtype(arr.dtype, np.integer):
            cand_indices = space._as_indices(arr)
        elif space.is_euclidean:
            cand_coords = space._as_coords(arr)
            pts = space.points
            radius = max(
                radius,
                float(euclidean_distances(cand_coords, pts).max()),
                float(euclidean_distances(cand_coords, cand_coords).max()),
            )
        else:
            raise EmptyCandidateSet("metric-space candidates must be indices into V")
    refs = cand_indices if cand_indices is not None else cand_coords
    if len(refs) == 0:
        raise EmptyCandidateSet("no candidate centers")
    block = space.pairwise(refs, idx)
    if objective.power == 2:
        block = block**2
    return _Problem(space, np.ascontiguousarray(block), weights, cand_indices, cand_coords, radius)


def _swap_table(problem, current):
    """(k, m) total cost of every swap; entries swapping in a current center are inf."""
    k = len(current)
    d1, d2, owner = kernels.nearest_two(problem.costs[current])
    table = kernels.swap_costs(problem.costs, problem.weights, d1, d2, owner, k)
    table[:, current] = np.inf
    return table


def dp_local_search(space, dataset, k, eps, rounds=None, rng=None, *,
                    objective=Objective.MEDIAN, candidates=None):
    """Exponential-mechanism local search over single swaps.

    Starts from the k lowest-index candidates. Each of ``rounds`` iterations
    samples one swap (out of k * (m - k)) with utility equal to minus the total
    cost after the swap, spending eps / (2 rounds) per round; a final
    selection among all visited center sets spends the remaining eps / 2.
    The sensitivity is the radius M for k-median and M^2 for k-means.
    """
    objective = Objective(objective)
    problem = build_problem(space, dataset, objective, candidates)
    if k < 1 or k > problem.m:
        raise KTooLarge(f"k = {k} must lie in [1, {problem.m}]")
    rounds = default_rounds(k, problem.m) if rounds is None else int(rounds)
    if rounds < 1:
        raise ValidationError("rounds must be >= 1")
    if rng is None:
        rng = np.random.default_rng(0)
    sensitivity = problem.radius**objective.power
    if sensitivity == 0:
        # Every distance is zero so every output has the same cost.
        sensitivity = 1.0
    eps_round = eps / (2.0 * rounds)
    eps_select = eps / 2.0
    ledger = {
        "rounds": rounds,
        "eps_per_round": eps_round,
        "eps_selection": eps_select,
        "eps_total": rounds * eps_round + eps_select if math.isfinite(eps) else "inf",
    }
    if math.isfinite(eps):
        assert math.isclose(ledger["eps_total"], eps, rel_tol=1e-12), ledger
    else:
        ledger.update(eps_per_round="inf", eps_selection="inf")

    current = list(range(k))
    visited = [tuple(current)]
    visited_cost = [problem.total_cost(current)]
    if k < problem.m:
        for _ in range(rounds):
            table = _swap_table(problem, current)
            valid = np.isfinite(table)
            pos = np.flatnonzero(valid.ravel())
            pick = pos[exponential_mechanism(-table.ravel()[pos], eps_round, sensitivity, rng)]
            out_slot, incoming = divmod(int(pick), problem.m)
            current[out_slot] = incoming
            visited.append(tuple(sorted(current)))
            visited_cost.append(float(table[out_slot, incoming]))
    choice = exponential_mechanism(-np.asarray(visited_cost), eps_select, sensitivity, rng)
    chosen = sorted(visited[choice])
    return problem.center_set(chosen, budget_ledger=ledger, visited=len(visited))


def dp_local_search_kmedian(space, dataset, k, eps, rounds=None, rng=None, candidates=None):
    return dp_local_search(space, dataset, k, eps, rounds, rng,
                           objective=Objective.MEDIAN, candidates=candidates)


def dp_local_search_kmeans(space, dataset, k, eps, rounds=None, rng=None, candidates=None):
    return dp_local_search(space, dataset, k, eps, rounds, rng,
                           objective=Objective.MEANS, candidates=candidates)


def local_search(space, dataset, k, rounds=None, rng=None, *, objective=Objective.MEDIAN,
                 tolerance=0.0, candidates=None, init=None):
    """Non-private best-improvement single-swap local search.

    Starts from k distinct candidates drawn with ``rng`` (or ``init``) and
    applies the best swap while it lowers the cost below (1 - tolerance/k)
    times the current cost. ``rounds`` caps the number of swaps.
    """
    objective = Objective(objective)
    problem = build_problem(space, dataset, objective, candidates)
    if k < 1 or k > problem.m:
        raise KTooLarge(f"k = {k} must lie in [1, {problem.m}]")
    if rng is None:
        rng = np.random.default_rng(0)
    if init is not None:
        current = [int(i) for i in init]
    else:
        current = sorted(int(i) for i in rng.choice(problem.m, size=k, replace=False))
    cost = problem.total_cost(current)
    limit = 10_000 if rounds is None else int(rounds)
    used = 0
    converged = k == problem.m
    while not converged and used < limit:
        table = _swap_table(problem, current)
        out_slot, incoming = np.unravel_index(int(np.argmin(table)), table.shape)
        best = float(table[out_slot, incoming])
        if best < cost * (1.0 - tolerance / k) - 1e-12 * max(cost, 1.0):
            current[out_slot] = int(incoming)
            cost = best
            used += 1
        else:
            converged = True
    return problem.center_set(sorted(current), converged=converged, swaps=used)


def local_search_kmedian(space, dataset, k, rounds=None, rng=None, **kw):
    return local_search(space, dataset, k, rounds, rng, objective=Objective.MEDIAN, **kw)


def local_search_kmeans(space, dataset, k, rounds=None, rng=None, **kw):
    return local_search(space, dataset, k, rounds, rng, objective=Objective.MEANS, **kw)


def best_swap_improvement(space, dataset, centers, objective=Objective.MEDIAN, candidates=None):
    """Largest cost decrease available from one swap (<= 0 at a local optimum).

    Recomputed from scratch with plain NumPy so it can certify the output of
    the kernel-based search.
    """
    objective = Objective(objective)
    problem = build_problem(space, dataset, objective, candidates)
    if problem.cand_indices is not None:
        pos = {int(v): i for i, v in enumerate(problem.cand_indices)}
        current = [pos[i] for i in centers.indices]
    else:
        current = [int(np.flatnonzero((problem.cand_coords == c).all(axis=1))[0]) for c in centers.coords]
    base = problem.total_cost(current)
    best = -math.inf
    for slot in range(len(current)):
        for cand in range(problem.m):
            if cand in current:
                continue
            trial = list(current)
            trial[slot] = cand
            best = max(best, base - problem.total_cost(trial))
    return best


# --------------------------------------------------------------- wrappers

@dataclass
class ClusteringBlackBox:
    """A clustering algorithm plus the metadata the pipeline reasons about."""

    meta: BlackBoxMeta
    algorithm: Algorithm
    k: int
    rounds: int | None = None
    candidates: object = None
    tolerance: float = 0.0
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.algorithm = Algorithm(self.algorithm)
        if self.algorithm is not Algorithm.DP_LOCAL_SEARCH and self.meta.is_private:
            raise ValidationError(f"{self.algorithm.value} is not private; use eps = inf")

    @property
    def objective(self):
        return self.meta.objective

    def __call__(self, space, dataset, rng):
        if self.algorithm is Algorithm.DP_LOCAL_SEARCH:
            return dp_local_search(space, dataset, self.k, self.meta.eps, self.rounds, rng,
                                   objective=self.objective, candidates=self.candidates)
        if self.algorithm is Algorithm.LOCAL_SEARCH:
            return local_search(space, dataset, self.k, self.rounds, rng, objective=self.objective,
                                tolerance=self.tolerance, candidates=self.candidates)
        from sublinear_dp.oracle import brute_force_opt

        result = brute_force_opt(space, dataset, self.k, self.objective, candidates=self.candidates)
        return result.optimum_centers


def make_black_box(algorithm, objective, k, *, eps=NON_PRIVATE, delta=0.0, alpha=None,
                   gamma=0.0, rounds=None, candidates=None, tolerance=0.0):
    """Black box with documented default approximation ratios.

    Defaults: exact oracle alpha = 1; single-swap local search alpha = 5
    (median) / 25 (means); DP local search alpha = 6 (median) / 30 (means).
    """
    algorithm = Algorithm(algorithm)
    objective = Objective(objective)
    if alpha is None:
        alpha = {
            Algorithm.ORACLE: (1.0, 1.0),
            Algorithm.LOCAL_SEARCH: (5.0, 25.0),
            Algorithm.DP_LOCAL_SEARCH: (6.0, 30.0),
        }[algorithm][objective is Objective.MEANS]
    meta = BlackBoxMeta(alpha=alpha, gamma=gamma, eps=eps, delta=delta, objective=objective)
    return ClusteringBlackBox(meta, algorithm, k, rounds=rounds, candidates=candidates,
                              tolerance=tolerance)
