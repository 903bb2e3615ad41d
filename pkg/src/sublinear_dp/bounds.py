"""Sample-size calculators for subsampled k-median / k-means.

Each combined calculator returns the smallest integer ``s`` with

    s >= c * max{good_term, bad_term}

where ``good_term`` comes from the requirement that the black box's solution
on the sample is good, and ``bad_term`` from the union bound over all bad
center sets (``n^k`` of them in a finite metric, an eta-net of size
``(sqrt(d) M / 2 eta)^(kd)`` in R^d). k-means replaces M by M^2 throughout.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass

from sublinear_dp.errors import EtaTooLargeForNet, InvalidBoundInputs, ZeroOptimumCost

DEFAULT_C = 3.0
# Ceil snaps values within this relative distance of an integer onto it, so
# that e.g. 36 * (1 + 1e-16) stays 36.
_SNAP_RTOL = 1e-9


class Variant(enum.Enum):
    MEDIAN_METRIC = "median-metric"
    MEDIAN_EUCLID = "median-euclid"
    MEANS_METRIC = "means-metric"
    MEANS_EUCLID = "means-euclid"

    @property
    def is_means(self):
        return self in (Variant.MEANS_METRIC, Variant.MEANS_EUCLID)

    @property
    def is_euclid(self):
        return self in (Variant.MEDIAN_EUCLID, Variant.MEANS_EUCLID)


class DominantTerm(enum.Enum):
    GOOD_LEMMA = "GoodLemma"
    BAD_LEMMA = "BadLemma"


@dataclass(frozen=True)
class BoundInputs:
    M: float
    alpha: float
    k: int
    eta: float
    theta: float
    gamma: float = 0.0
    n: int | None = None
    d: int | None = None
    c: float = DEFAULT_C

    def validate(self, variant):
        if not (self.M >= 0 and math.isfinite(self.M)):
            raise InvalidBoundInputs(f"M must be a finite nonnegative real, got {self.M}")
        if not self.alpha >= 1:
            raise InvalidBoundInputs(f"alpha must be >= 1, got {self.alpha}")
        if not self.gamma >= 0:
            raise InvalidBoundInputs(f"gamma must be >= 0, got {self.gamma}")
        if not self.eta > 0:
            raise InvalidBoundInputs(f"eta must be > 0, got {self.eta}")
        if not 0 < self.theta < 1:
            raise InvalidBoundInputs(f"theta must lie in (0, 1), got {self.theta}")
        if not self.c > 0:
            raise InvalidBoundInputs(f"c must be > 0, got {self.c}")
        if int(self.k) != self.k or self.k < 1:
            raise InvalidBoundInputs(f"k must be a positive integer, got {self.k}")
        if variant.is_euclid:
            if self.d is None or int(self.d) != self.d or self.d < 1:
                raise InvalidBoundInputs(f"{variant.value} needs an integer dimension d >= 1")
        else:
            if self.n is None or int(self.n) != self.n or self.n < self.k:
                raise InvalidBoundInputs(f"{variant.value} needs an integer n >= k")


@dataclass(frozen=True)
class SampleBound:
    variant: Variant
    s: int
    dominant_term: DominantTerm
    good_term: float
    bad_term: float
    inputs: BoundInputs

    def to_json(self):
        return {
            "variant": self.variant.value,
            "s": self.s,
            "dominant_term": self.dominant_term.value,
            "good_term": self.good_term,
            "bad_term": self.bad_term,
            "inputs": asdict(self.inputs),
        }


def ceil_count(x):
    """Ceiling for sample counts, clamped to >= 1, ignoring float fuzz."""
    if not math.isfinite(x):
        raise InvalidBoundInputs(f"bound is not finite: {x}")
    r = round(x)
    if abs(x - r) <= _SNAP_RTOL * max(1.0, abs(x)):
        return max(1, int(r))
    return max(1, math.ceil(x))


def net_log_size(k, d, M, eta):
    """Log of the eta-net union-bound count, k d ln(sqrt(d) M / (2 eta))."""
    ratio = math.sqrt(d) * M / (2.0 * eta)
    if not ratio > 1.0:
        raise EtaTooLargeForNet(
            f"sqrt(d) M / (2 eta) = {ratio:.6g} <= 1; the eta-net term is not positive"
        )
    return k * d * math.log(ratio)


def _combined(variant, inp):
    inp.validate(variant)
    scale = inp.M**2 if variant.is_means else inp.M
    log_inv_theta = -math.log(inp.theta)
    if inp.M == 0:
        return SampleBound(variant, 1, DominantTerm.GOOD_LEMMA, 0.0, 0.0, inp)
    if variant.is_euclid:
        union = net_log_size(inp.k, inp.d, inp.M, inp.eta)
    else:
        union = inp.k * math.log(inp.n)
    good = scale * inp.alpha * (1.0 + inp.alpha) * log_inv_theta / inp.eta
    bad = (scale / inp.eta) ** 2 * (log_inv_theta + union)
    dominant = DominantTerm.BAD_LEMMA if bad > good else DominantTerm.GOOD_LEMMA
    return SampleBound(variant, ceil_count(inp.c * max(good, bad)), dominant, good, bad, inp)


def s_median_metric(inp):
    return _combined(Variant.MEDIAN_METRIC, inp)


def s_median_euclid(inp):
    return _combined(Variant.MEDIAN_EUCLID, inp)


def s_means_metric(inp):
    return _combined(Variant.MEANS_METRIC, inp)


def s_means_euclid(inp):
    return _combined(Variant.MEANS_EUCLID, inp)


CALCULATORS = {
    Variant.MEDIAN_METRIC: s_median_metric,
    Variant.MEDIAN_EUCLID: s_median_euclid,
    Variant.MEANS_METRIC: s_means_metric,
    Variant.MEANS_EUCLID: s_means_euclid,
}


def sample_size(variant, inp):
    return CALCULATORS[Variant(variant)](inp)


def _check_inner(M, beta, theta, opt_avg):
    if not opt_avg >= 0:
        raise InvalidBoundInputs(f"opt_avg must be nonnegative, got {opt_avg}")
    if opt_avg == 0:
        raise ZeroOptimumCost("inner bounds are undefined when the optimum cost is zero")
    if not beta > 0:
        raise InvalidBoundInputs(f"beta must be > 0, got {beta}")
    if not 0 < theta < 1:
        raise InvalidBoundInputs(f"theta must lie in (0, 1), got {theta}")
    if not M >= 0:
        raise InvalidBoundInputs(f"M must be nonnegative, got {M}")


def inner_good_bound(variant, M, alpha, beta, theta, opt_avg):
    """Sample size making the black box's sample solution (alpha + beta)-good.

    median: 3 M alpha (beta + alpha) ln(1/theta) / (beta^2 opt)
    means:  3 M^2 alpha (beta + alpha) ln(1/theta) / (2 beta^2 opt)
    """
    variant = Variant(variant)
    _check_inner(M, beta, theta, opt_avg)
    if not alpha >= 1:
        raise InvalidBoundInputs(f"alpha must be >= 1, got {alpha}")
    num = 3.0 * alpha * (beta + alpha) * -math.log(theta)
    if variant.is_means:
        value = M**2 * num / (2.0 * beta**2 * opt_avg)
    else:
        value = M * num / (beta**2 * opt_avg)
    return ceil_count(value)


def inner_bad_bound(variant, M, beta, theta, opt_avg, *, k, n=None, d=None, eta=None):
    """Sample size after which no bad center set looks good on the sample.

    median: M^2 (ln(1/theta) + U) / (2 beta^2 opt^2)
    means:  2 M^4 (ln(1/theta) + U) / (beta^2 opt^2)
    with U = k ln n (metric) or k d ln(sqrt(d) M / (2 eta)) (Euclidean).
    """
    variant = Variant(variant)
    _check_inner(M, beta, theta, opt_avg)
    if variant.is_euclid:
        if d is None or eta is None:
            raise InvalidBoundInputs("Euclidean inner bound needs d and eta")
        union = net_log_size(k, d, M, eta)
    else:
        if n is None or n < k:
            raise InvalidBoundInputs("metric inner bound needs n >= k")
        union = k * math.log(n)
    log_term = -math.log(theta) + union
    if variant.is_means:
        value = 2.0 * M**4 * log_term / (beta**2 * opt_avg**2)
    else:
        value = M**2 * log_term / (2.0 * beta**2 * opt_avg**2)
    return ceil_count(value)


def beta_star(eta, opt_avg):
    """Slack parameter beta* = eta / (3 opt) used to drop the opt dependence."""
    if opt_avg <= 0:
        raise ZeroOptimumCost("beta* is undefined when the optimum cost is zero")
    return eta / (3.0 * opt_avg)
