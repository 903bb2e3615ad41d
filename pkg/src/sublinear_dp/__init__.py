"""Differentially private k-median / k-means clustering in sublinear time.

Run any (eps, delta)-DP clustering black box on a Poisson subsample of the
data, account for the amplified privacy, and size the sample so the clustering
stays accurate on the full data.
"""

__version__ = "0.1.0"

from sublinear_dp.blackbox import (
    Algorithm,
    BlackBoxMeta,
    ClusteringBlackBox,
    NON_PRIVATE,
    Objective,
    dp_local_search_kmeans,
    dp_local_search_kmedian,
    exponential_mechanism,
    local_search_kmeans,
    local_search_kmedian,
    make_black_box,
)
from sublinear_dp.bounds import (
    BoundInputs,
    SampleBound,
    Variant,
    inner_bad_bound,
    inner_good_bound,
    s_means_euclid,
    s_means_metric,
    s_median_euclid,
    s_median_metric,
)
from sublinear_dp.kernels import BACKEND
from sublinear_dp.metric import (
    CenterRole,
    CenterSet,
    Dataset,
    MetricSpace,
    avg_cost_means,
    avg_cost_median,
    diameter,
    distance,
    nearest_center,
)
from sublinear_dp.oracle import (
    brute_force_opt_means,
    brute_force_opt_median,
    em_distribution_oracle,
    grid_search_opt,
)
from sublinear_dp.pipeline import PipelineConfig, choose_xi_from_bound, poisson_subsample, run_pipeline
from sublinear_dp.privacy import (
    AmplifiedPrivacy,
    PrivacySpec,
    amplify,
    group_privacy_delta,
    group_privacy_guarantee,
    naive_group_privacy,
)
