"""Closed-form privacy accounting for Poisson-subsampled mechanisms.

Covers amplification of an (eps, delta) guarantee when every record is kept
independently with probability ``xi``, and the group-privacy guarantee such a
sampler gives for groups of ``g`` records.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.special import gammaln

from sublinear_dp.errors import (
    InvalidPrivacySpec,
    InvalidSamplingProbability,
    NonzeroDeltaUnsupported,
    ThresholdOutOfRange,
)

# Binomial tails up to this group size are summed in exact rational arithmetic.
EXACT_TAIL_MAX_G = 64


@dataclass(frozen=True)
class PrivacySpec:
    eps: float
    delta: float = 0.0

    def __post_init__(self):
        if not (self.eps > 0):
            raise InvalidPrivacySpec(f"eps must be positive, got {self.eps}")
        if not (0.0 <= self.delta < 1.0):
            raise InvalidPrivacySpec(f"delta must lie in [0, 1), got {self.delta}")


@dataclass(frozen=True)
class AmplifiedPrivacy:
    eps_prime: float
    delta_prime: float
    xi: float
    source: PrivacySpec | None = None

    def to_json(self):
        return {"eps_prime": self.eps_prime, "delta_prime": self.delta_prime, "xi": self.xi}


@dataclass(frozen=True)
class GroupPrivacyResult:
    g: int
    T: int
    xi: float
    eps_group: float
    delta_group: float

    def to_json(self):
        return {
            "g": self.g,
            "T": self.T,
            "xi": self.xi,
            "eps_group": self.eps_group,
            "delta_group": self.delta_group,
        }


def _check_xi(xi):
    if not (0.0 < xi <= 1.0):
        raise InvalidSamplingProbability(f"sampling probability must lie in (0, 1], got {xi}")
    return float(xi)


def amplify(spec, xi):
    """Privacy of running an (eps, delta)-DP mechanism on a Bernoulli(xi) sample.

    eps' = ln max{xi(e^eps - 1) + 1, 1 / (xi(e^-eps - 1) + 1)}
    delta' = max{e^-eps delta xi / (xi(e^-eps - 1) + 1), delta xi}

    Both arguments of the max are 1 + O(xi), so they are evaluated through
    log1p/expm1 to keep full precision for tiny xi.
    """
    if not isinstance(spec, PrivacySpec):
        raise InvalidPrivacySpec(f"expected a PrivacySpec, got {type(spec).__name__}")
    xi = _check_xi(xi)
    eps, delta = spec.eps, spec.delta
    if xi == 1.0:
        return AmplifiedPrivacy(eps, delta, xi, spec)
    up = xi * math.expm1(eps)             # first branch minus one
    down = xi * math.expm1(-eps)          # in (-1, 0)
    assert down > -1.0, "xi(e^-eps - 1) + 1 must stay positive"
    eps_prime = max(math.log1p(up), -math.log1p(down))
    delta_prime = max(math.exp(-eps) * delta * xi / (1.0 + down), delta * xi)
    return AmplifiedPrivacy(eps_prime, delta_prime, xi, spec)


def _check_group(g, T):
    if isinstance(g, bool) or int(g) != g or g < 1:
        raise ThresholdOutOfRange(f"group size must be a positive integer, got {g}")
    if isinstance(T, bool) or int(T) != T or not 0 <= T <= g:
        raise ThresholdOutOfRange(f"threshold T must be an integer in [0, {g}], got {T}")
    return int(g), int(T)


def binomial_tail_exact(xi, g, T):
    """P[Bin(g, xi) > T] as an exact Fraction (xi is taken at its exact binary value)."""
    q = Fraction(xi)
    head = sum(math.comb(g, j) * q**j * (1 - q) ** (g - j) for j in range(T + 1))
    return 1 - head


def _binomial_tail_logspace(xi, g, T):
    # Sum the smaller side of the distribution to avoid cancellation.
    j = np.arange(g + 1)
    if xi == 1.0:
        return 0.0 if T >= g else 1.0
    logpmf = (
        gammaln(g + 1) - gammaln(j + 1) - gammaln(g - j + 1)
        + j * math.log(xi) + (g - j) * math.log1p(-xi)
    )
    upper = logpmf[T + 1:]
    lower = logpmf[: T + 1]
    if upper.size == 0:
        return 0.0
    if upper.max() <= lower.max():
        m = upper.max()
        return float(min(1.0, math.exp(m) * np.exp(upper - m).sum()))
    m = lower.max()
    return float(max(0.0, 1.0 - math.exp(m) * np.exp(lower - m).sum()))


def group_privacy_delta(xi, g, T):
    """Probability that more than T of g group members land in the sample."""
    xi = _check_xi(xi)
    g, T = _check_group(g, T)
    if T == g:
        return 0.0
    if g <= EXACT_TAIL_MAX_G:
        return float(binomial_tail_exact(xi, g, T))
    return _binomial_tail_logspace(xi, g, T)


def group_privacy_guarantee(amplified, g, T):
    """(T * eps', delta_{T,xi,g}) privacy for groups of size g."""
    delta = group_privacy_delta(amplified.xi, g, T)
    return GroupPrivacyResult(
        g=int(g), T=int(T), xi=amplified.xi, eps_group=T * amplified.eps_prime, delta_group=delta
    )


def naive_group_privacy(spec, g):
    """Baseline (g * eps, 0) group privacy of a pure-DP mechanism."""
    if spec.delta != 0:
        raise NonzeroDeltaUnsupported("the naive group bound is stated for pure DP only")
    if isinstance(g, bool) or int(g) != g or g < 1:
        raise ThresholdOutOfRange(f"group size must be a positive integer, got {g}")
    return g * spec.eps, 0.0


def sqrt_regime(g):
    """(xi, T) = (1/sqrt g, ceil(2 sqrt g)): delta is negligible in g."""
    return 1.0 / math.sqrt(g), min(int(g), math.ceil(2.0 * math.sqrt(g)))


def log_regime(g):
    """(xi, T) = (1/ln g, ceil(2g / ln g)); requires g > e so that xi < 1."""
    if g <= math.e:
        raise ThresholdOutOfRange("the 1/log g regime needs g > e")
    return 1.0 / math.log(g), min(int(g), math.ceil(2.0 * g / math.log(g)))
