"""Subsample-then-cluster wrapper with its amplified privacy guarantee.

Every record is kept independently with probability ``xi``; the black box
only ever sees the sample. The report carries the amplified (eps', delta')
of the whole procedure.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from sublinear_dp.blackbox import ClusteringBlackBox, Objective
from sublinear_dp.errors import EmptySample, InvalidSamplingProbability, ValidationError
from sublinear_dp.metric import Dataset, avg_cost_means, avg_cost_median
from sublinear_dp.privacy import AmplifiedPrivacy, amplify

MAX_SEED = 2**64 - 1


class EmptySamplePolicy(enum.Enum):
    ERROR = "error"
    RETRY_ONCE = "retry-once"


class Regime(enum.Enum):
    SUBLINEAR = "sublinear"
    FULL_DATA = "full-data"


@dataclass(frozen=True)
class PipelineConfig:
    xi: float
    blackbox: ClusteringBlackBox
    seed: int = 0
    empty_sample_policy: EmptySamplePolicy = EmptySamplePolicy.ERROR

    def __post_init__(self):
        if not 0 < self.xi <= 1:
            raise InvalidSamplingProbability(f"xi must lie in (0, 1], got {self.xi}")
        if int(self.seed) != self.seed or not 0 <= self.seed <= MAX_SEED:
            raise ValidationError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        object.__setattr__(self, "empty_sample_policy", EmptySamplePolicy(self.empty_sample_policy))


@dataclass(frozen=True)
class PipelineReport:
    centers: object
    sample_size: int
    avg_cost_on_sample: float
    avg_cost_on_full: float
    amplified: AmplifiedPrivacy | None
    regime_flag: Regime
    seed: int = 0
    retried: bool = False
    budget_ledger: dict | None = field(default=None, compare=False)

    def to_json(self):
        out = {
            "seed": self.seed,
            "centers": self.centers.to_json(),
            "sample_size": self.sample_size,
            "avg_cost_on_sample": self.avg_cost_on_sample,
            "avg_cost_on_full": self.avg_cost_on_full,
            "amplified": None if self.amplified is None else self.amplified.to_json(),
            "regime_flag": self.regime_flag.value,
            "retried": self.retried,
        }
        if self.budget_ledger is not None:
            out["budget_ledger"] = self.budget_ledger
        return out


def poisson_subsample(dataset, xi, rng):
    """Keep each member independently with probability xi (order preserved)."""
    if not 0 < xi <= 1:
        raise InvalidSamplingProbability(f"xi must lie in (0, 1], got {xi}")
    if xi == 1:
        return Dataset(dataset.space, dataset.members)
    keep = rng.random(dataset.size) < xi
    return dataset.subset(keep)


def choose_xi_from_bound(bound, data_size):
    """Sampling probability s / |D|, clamped to 1 (full-data regime)."""
    if data_size < 1:
        raise ValidationError("data_size must be >= 1")
    s = bound.s if hasattr(bound, "s") else int(bound)
    if s >= data_size:
        return 1.0, Regime.FULL_DATA
    return s / data_size, Regime.SUBLINEAR


def cost_function(objective):
    return avg_cost_means if Objective(objective) is Objective.MEANS else avg_cost_median


def run_pipeline(space, dataset, cfg):
    """Subsample with cfg.xi, cluster the sample, report costs and privacy."""
    sample_ss, box_ss = np.random.SeedSequence(int(cfg.seed)).spawn(2)
    sample_rng = np.random.default_rng(sample_ss)
    sample = poisson_subsample(dataset, cfg.xi, sample_rng)
    retried = False
    if sample.size == 0:
        if cfg.empty_sample_policy is EmptySamplePolicy.RETRY_ONCE:
            retried = True
            sample = poisson_subsample(dataset, cfg.xi, sample_rng)
        if sample.size == 0:
            raise EmptySample(f"Bernoulli({cfg.xi}) sample of {dataset.size} records is empty")
    box = cfg.blackbox
    centers = box(space, sample, np.random.default_rng(box_ss))
    cost = cost_function(box.objective)
    meta = box.meta
    amplified = amplify(meta.privacy_spec(), cfg.xi) if meta.is_private else None
    return PipelineReport(
        centers=centers,
        sample_size=sample.size,
        avg_cost_on_sample=cost(sample, centers),
        avg_cost_on_full=cost(dataset, centers),
        amplified=amplified,
        regime_flag=Regime.FULL_DATA if cfg.xi == 1 else Regime.SUBLINEAR,
        seed=int(cfg.seed),
        retried=retried,
        budget_ledger=centers.extra.get("budget_ledger"),
    )
