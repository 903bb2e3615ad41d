"""Acceptance gate: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -s`` to see the summary lines.
"""

import contextlib
import json
import subprocess
import sys
import time

import numpy as np
import pytest

import oracles
from conftest import small_instances
from sublinear_dp.blackbox import (
    NON_PRIVATE,
    Algorithm,
    Objective,
    dp_local_search_kmedian,
    exponential_mechanism,
    local_search_kmedian,
    make_black_box,
)
from sublinear_dp.bounds import BoundInputs, s_median_euclid, s_median_metric
from sublinear_dp.harness import ExperimentConfig, run_experiment
from sublinear_dp.metric import avg_cost_median
from sublinear_dp.oracle import brute_force_opt_means, brute_force_opt_median, em_distribution_oracle
from sublinear_dp.pipeline import PipelineConfig, run_pipeline
from sublinear_dp.privacy import PrivacySpec, amplify, group_privacy_delta


@pytest.fixture
def criterion(capsys):
    @contextlib.contextmanager
    def report(name):
        start = time.perf_counter()
        try:
            yield
        except BaseException as exc:
            with capsys.disabled():
                print(f"\nFAIL  {name}  ({time.perf_counter() - start:.2f}s): {exc!r}")
            raise
        with capsys.disabled():
            print(f"\nPASS  {name}  ({time.perf_counter() - start:.2f}s)")

    return report


def test_c1_amplification_worked_example(criterion):
    with criterion("C1 amplification worked example"):
        for delta in (0.0, 1e-6, 0.3):
            amp = amplify(PrivacySpec(0.5, delta), 0.001)
            assert amp.eps_prime < 0.00065
            assert abs(amp.eps_prime - 0.000648511) <= 1e-9
            assert amp.delta_prime == 0.001 * delta


def test_c2_amplification_identities(criterion):
    with criterion("C2 amplification identities"):
        for eps in (0.01, 0.5, 1.0, 3.0):
            for delta in (0.0, 1e-5, 0.2):
                amp = amplify(PrivacySpec(eps, delta), 1.0)
                assert (amp.eps_prime, amp.delta_prime) == (eps, delta)
        eps_grid = np.geomspace(0.01, 10, 25)
        xi_grid = np.geomspace(1e-6, 1.0, 40)
        assert len(eps_grid) * len(xi_grid) == 1000
        for eps in eps_grid:
            prev = None
            for xi in xi_grid:
                amp = amplify(PrivacySpec(float(eps), 0.1), float(xi))
                assert amp.eps_prime <= eps and amp.delta_prime <= 0.1
                if prev is not None:
                    assert amp.eps_prime >= prev.eps_prime and amp.delta_prime >= prev.delta_prime
                prev = amp


def test_c3_group_privacy(criterion):
    with criterion("C3 group privacy tail"):
        for xi in (0.01, 0.1, 0.5):
            for g in range(1, 31):
                vals = [group_privacy_delta(xi, g, T) for T in range(g + 1)]
                for T, v in enumerate(vals):
                    want = float(oracles.binomial_upper_tail_rational(xi, g, T))
                    assert abs(v - want) <= 1e-12
                assert vals[g] == 0.0
                assert all(a >= b for a, b in zip(vals, vals[1:]))


EM_VECTORS = [
    [0.0, 0.0, 0.0, 0.0, 0.0],
    [0.0, -1.0, -2.0, -3.0, -4.0],
    [1.0, 0.5, 0.25, 0.125, 0.0],
    [-10.0, -10.5, -9.0, -12.0, -9.5],
    [100.0, 99.0, 99.5, 98.0, 100.0],
    [0.3, -0.7, 1.2, 0.0, -2.2],
    [5.0, 4.0, 3.0, 4.0, 5.0],
    [-0.1, -0.2, -0.3, -0.4, -5.0],
    [2.0, 2.0, -2.0, -2.0, 0.0],
    [1e3, 1e3 - 1, 1e3 - 2, 1e3 - 3, 1e3 - 4],
]
EM_PARAMS = [(1.0, 1.0), (2.0, 1.0), (0.5, 0.25), (1.0, 1.0), (3.0, 2.0),
             (1.5, 0.5), (0.8, 1.0), (4.0, 0.5), (1.0, 2.0), (2.0, 1.0)]


def test_c4_exponential_mechanism_distribution(criterion):
    with criterion("C4 exponential mechanism distribution"):
        rng = np.random.default_rng(20240601)
        draws = 100_000
        for u, (eps, sens) in zip(EM_VECTORS, EM_PARAMS):
            picks = exponential_mechanism(u, eps, sens, rng, size=draws)
            freq = np.bincount(picks, minlength=5) / draws
            want = np.array(em_distribution_oracle(u, eps, sens), dtype=float)
            tv = 0.5 * np.abs(freq - want).sum()
            assert tv <= 0.02, (u, tv)


def test_c5_oracle_equivalence(criterion):
    with criterion("C5 oracle equivalence at xi=1"):
        for i, (space, data, k) in enumerate(small_instances(20)):
            assert space.n <= 12 and k <= 3
            for objective, solve in ((Objective.MEDIAN, brute_force_opt_median),
                                     (Objective.MEANS, brute_force_opt_means)):
                box = make_black_box(Algorithm.ORACLE, objective, k)
                report = run_pipeline(space, data, PipelineConfig(xi=1.0, blackbox=box, seed=i))
                assert report.sample_size == data.size
                assert report.avg_cost_on_full == solve(space, data, k).optimum_avg_cost


def test_c6_local_search_quality(criterion):
    with criterion("C6 non-private local search within 5x optimum"):
        for i, (space, data, k) in enumerate(small_instances(20)):
            opt = brute_force_opt_median(space, data, k).optimum_avg_cost
            centers = local_search_kmedian(space, data, k, rng=np.random.default_rng(i))
            assert avg_cost_median(data, centers) <= 5 * opt + 1e-9
            centers = dp_local_search_kmedian(space, data, k, NON_PRIVATE)
            assert avg_cost_median(data, centers) <= 5 * opt + 1e-9


BLOBS = {"kind": "gaussian_blobs", "centers": 3, "spread": 0.01,
         "points_per_blob": [667, 667, 666], "d": 2}


@pytest.mark.parametrize("variant", ["median-metric", "means-metric"])
def test_c7_desk_scale_accuracy(criterion, variant):
    with criterion(f"C7 desk-scale accuracy ({variant})"):
        cfg = ExperimentConfig(generator=BLOBS, variant=variant, algorithm="local-search", k=3,
                               trials=50, eta=0.2, theta=0.1, c=3.0, alpha=5.0, gamma=0.0, base_seed=0)
        report = run_experiment(cfg)
        assert report.trials[0].sample_size > 0
        assert report.guarantee_threshold == pytest.approx(5 * report.opt_proxy + 0.2, rel=1e-15)
        assert report.success_fraction >= 0.8, report.success_fraction


def test_c8_sample_bound_formulas(criterion):
    with criterion("C8 sample-bound formulas"):
        metric = BoundInputs(M=1, alpha=6, k=3, n=1000, eta=0.1, theta=0.05, c=1)
        euclid = BoundInputs(M=1, alpha=6, k=3, d=2, eta=0.01, theta=0.05, c=1)
        assert s_median_metric(metric).s == 2372
        assert s_median_euclid(euclid).s == 285474
        assert oracles.combined_bound(1, 6, 3, 0.1, 0.05, 1, n=1000)[2] == 2372
        assert oracles.combined_bound(1, 6, 3, 0.01, 0.05, 1, d=2)[2] == 285474

        rng = np.random.default_rng(8)
        for _ in range(300):
            p = dict(M=float(rng.uniform(0.1, 5)), alpha=float(rng.uniform(1, 10)), k=int(rng.integers(1, 6)),
                     n=int(rng.integers(10, 10**5)), eta=float(rng.uniform(0.01, 1)),
                     theta=float(rng.uniform(0.01, 0.5)), c=1.0)
            base = s_median_metric(BoundInputs(**p)).s
            want = oracles.combined_bound(p["M"], p["alpha"], p["k"], p["eta"], p["theta"], 1, n=p["n"])[2]
            assert abs(base - want) <= 1  # float vs 50-digit ceiling can differ only at an exact integer
            for key, factor in (("M", 1.5), ("alpha", 1.5), ("k", 2), ("n", 3)):
                assert s_median_metric(BoundInputs(**dict(p, **{key: p[key] * factor}))).s >= base
            for key in ("eta", "theta"):
                assert s_median_metric(BoundInputs(**dict(p, **{key: p[key] / 2}))).s >= base


CLI_RUNS = [
    ["amplify", "--eps", "0.5", "--delta", "0.01", "--xi", "0.001"],
    ["group-privacy", "--eps", "1", "--xi", "0.1", "--g", "100", "--T", "20"],
    ["sample-size", "--variant", "median-euclid", "--M", "1", "--alpha", "6", "--k", "3", "--d", "2",
     "--eta", "0.01", "--theta", "0.05", "--c", "1"],
    ["cluster", "--data", "{pts}", "--k", "2", "--eps", "1.0", "--seed", "5"],
    ["cluster", "--data", "{pts}", "--k", "2", "--algorithm", "local-search", "--objective", "means", "--seed", "5"],
    ["oracle", "--data", "{pts}", "--k", "2"],
    ["oracle", "--data", "{pts}", "--k", "1", "--grid-step", "0.1"],
    ["pipeline", "--data", "{pts}", "--k", "2", "--xi", "0.7", "--eps", "1.0", "--seed", "11"],
    ["pipeline", "--data", "{pts}", "--k", "2", "--auto-xi", "--seed", "11", "--empty-sample-policy", "retry-once"],
    ["experiment", "--config", "{cfg}"],
    ["experiment", "--config", "{cfg}", "--report-format", "csv"],
]


def test_c9_cli_determinism(criterion, tmp_path):
    with criterion("C9 CLI determinism"):
        rng = np.random.default_rng(0)
        pts = tmp_path / "pts.csv"
        np.savetxt(pts, np.concatenate([rng.normal(0, 0.1, (20, 2)), rng.normal(3, 0.1, (20, 2))]), delimiter=",")
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"generator": {"kind": "uniform_metric", "n": 10}, "k": 2, "trials": 4,
                                   "algorithm": "dp-local-search", "eps": 2.0, "xi": 0.6, "base_seed": 3}))
        for argv in CLI_RUNS:
            argv = [a.format(pts=pts, cfg=cfg) for a in argv]
            outs = [subprocess.run([sys.executable, "-m", "sublinear_dp", *argv],
                                   capture_output=True, check=True).stdout for _ in range(2)]
            assert outs[0] and outs[0] == outs[1], argv
