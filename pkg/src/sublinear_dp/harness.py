"""Synthetic instances, multi-trial experiments and report serialization."""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.sparse.csgraph import shortest_path

from sublinear_dp.blackbox import Algorithm, NON_PRIVATE, Objective, local_search, make_black_box
from sublinear_dp.bounds import BoundInputs, DEFAULT_C, Variant, sample_size
from sublinear_dp.errors import InvalidGeneratorSpec, ReportIOError, ValidationError
from sublinear_dp.metric import (
    CenterRole,
    CenterSet,
    Dataset,
    MetricSpace,
    load_matrix_csv,
    load_points_csv,
)
from sublinear_dp.oracle import MAX_ENUMERATION, brute_force_opt
from sublinear_dp.pipeline import (
    PipelineConfig,
    PipelineReport,
    Regime,
    choose_xi_from_bound,
    cost_function,
    run_pipeline,
)
from sublinear_dp.privacy import AmplifiedPrivacy

SIG_DIGITS = 12
PROXY_RUNS = 20
CSV_COLUMNS = (
    "seed", "sample_size", "avg_cost_on_sample", "avg_cost_on_full",
    "eps_prime", "delta_prime", "success",
)


# ------------------------------------------------------------ formatting

def fmt_real(x):
    """Round a real to 12 significant digits; non-finite values become strings."""
    if x is None:
        return None
    x = float(x)
    if not math.isfinite(x):
        return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
    return float(f"{x:.{SIG_DIGITS}g}")


def normalize(obj):
    """Recursively apply :func:`fmt_real` to every float in a JSON-able value."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return fmt_real(obj)
    if isinstance(obj, dict):
        return {str(k): normalize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [normalize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return normalize(obj.tolist())
    if hasattr(obj, "value"):
        return obj.value
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj):
    return json.dumps(normalize(obj), indent=2) + "\n"


# ------------------------------------------------------------- generators

def dataset_from_points(points):
    """Euclidean space of the distinct points, dataset of all (multiset)."""
    points = np.asarray(points, dtype=np.float64)
    if points.ndim == 1:
        points = points[:, None]
    uniq, inverse = np.unique(points, axis=0, return_inverse=True)
    space = MetricSpace.from_points(uniq)
    return space, Dataset(space, inverse.reshape(-1))


def _blob_centers(count, d):
    if d == 1:
        return np.linspace(0.0, 1.0, count)[:, None]
    angles = 2 * np.pi * np.arange(count) / count
    out = np.zeros((count, d))
    out[:, 0] = 0.5 * np.cos(angles)
    out[:, 1] = 0.5 * np.sin(angles)
    return out


def generate_synthetic(spec, rng=None):
    """Build (space, dataset) from a generator description.

    ``spec`` is a dict with ``kind`` in {"gaussian_blobs", "uniform_metric",
    "from_file"}:

    * gaussian_blobs: centers (count or coordinate list), spread,
      points_per_blob (int or per-blob list), d. Rescaled to diameter 1.
    * uniform_metric: n, optional seed. Random weights closed under shortest
      paths, so the result always satisfies the triangle inequality.
    * from_file: path, format ("points" or "matrix").
    """
    if rng is None:
        rng = np.random.default_rng(0)
    spec = dict(spec)
    kind = spec.pop("kind", None)
    try:
        if kind == "gaussian_blobs":
            return _gaussian_blobs(rng, **spec)
        if kind == "uniform_metric":
            return _uniform_metric(rng, **spec)
        if kind == "from_file":
            return _from_file(**spec)
    except TypeError as exc:
        raise InvalidGeneratorSpec(f"bad {kind} parameters: {exc}") from exc
    raise InvalidGeneratorSpec(f"unknown generator kind {kind!r}")


def _gaussian_blobs(rng, centers=3, spread=0.01, points_per_blob=100, d=2):
    if isinstance(centers, (int, np.integer)):
        if centers < 1 or d < 1:
            raise InvalidGeneratorSpec("need at least one blob and d >= 1")
        centers = _blob_centers(int(centers), int(d))
    centers = np.atleast_2d(np.asarray(centers, dtype=np.float64))
    count, d = centers.shape
    sizes = (
        [int(points_per_blob)] * count
        if np.isscalar(points_per_blob)
        else [int(p) for p in points_per_blob]
    )
    if len(sizes) != count or min(sizes) < 1 or spread < 0:
        raise InvalidGeneratorSpec("points_per_blob must be positive per blob and spread >= 0")
    pts = np.concatenate(
        [c + spread * rng.standard_normal((size, d)) for c, size in zip(centers, sizes)]
    )
    space, data = dataset_from_points(pts)
    diam = data.diameter
    if diam > 0:
        space, data = dataset_from_points(pts / diam)
    return space, data


def _uniform_metric(rng, n, seed=None):
    if int(n) != n or n < 1:
        raise InvalidGeneratorSpec("uniform_metric needs n >= 1")
    n = int(n)
    if seed is not None:
        rng = np.random.default_rng(seed)
    w = rng.uniform(0.05, 1.0, size=(n, n))
    w = np.triu(w, 1)
    w = w + w.T
    dist = shortest_path(w, method="FW", directed=False)
    np.fill_diagonal(dist, 0.0)
    space = MetricSpace.from_matrix(dist)
    return space, Dataset.full(space)


def _from_file(path, format="points"):
    if format == "points":
        raw = load_points_csv(path)
        return dataset_from_points(raw.points)
    if format == "matrix":
        space = load_matrix_csv(path)
        return space, Dataset.full(space)
    raise InvalidGeneratorSpec(f"unknown file format {format!r}")


# ------------------------------------------------------------ experiments

@dataclass(frozen=True)
class ExperimentConfig:
    generator: dict
    variant: Variant = Variant.MEDIAN_METRIC
    algorithm: Algorithm = Algorithm.LOCAL_SEARCH
    k: int = 3
    trials: int = 50
    eta: float = 0.2
    theta: float = 0.1
    c: float = DEFAULT_C
    base_seed: int = 0
    eps: float = NON_PRIVATE
    delta: float = 0.0
    alpha: float | None = None
    gamma: float = 0.0
    rounds: int | None = None
    xi: float | None = None
    proxy_runs: int = PROXY_RUNS

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        object.__setattr__(self, "algorithm", Algorithm(self.algorithm))
        if int(self.trials) != self.trials or self.trials < 1:
            raise ValidationError("trials must be >= 1")
        if not isinstance(self.generator, dict):
            raise InvalidGeneratorSpec("generator must be a mapping")

    @property
    def objective(self):
        return Objective.MEANS if self.variant.is_means else Objective.MEDIAN

    @classmethod
    def from_json(cls, data):
        data = dict(data)
        if data.get("eps") in ("inf", None):
            data["eps"] = NON_PRIVATE
        try:
            return cls(**data)
        except TypeError as exc:
            raise ValidationError(f"bad experiment config: {exc}") from exc

    def to_json(self):
        out = asdict(self)
        out["variant"] = self.variant.value
        out["algorithm"] = self.algorithm.value
        return out


@dataclass(frozen=True)
class ExperimentReport:
    trials: tuple
    successes: tuple
    opt_proxy: float
    opt_source: str
    success_fraction: float
    guarantee_threshold: float
    alpha: float
    gamma_avg: float
    eta: float
    xi: float
    regime: Regime
    sample_bound: dict | None
    wall_time: float = field(default=0.0, compare=False)

    def to_json(self, timing=True):
        out = {
            "opt_proxy": self.opt_proxy,
            "opt_source": self.opt_source,
            "success_fraction": self.success_fraction,
            "guarantee_threshold": self.guarantee_threshold,
            "alpha": self.alpha,
            "gamma_avg": self.gamma_avg,
            "eta": self.eta,
            "xi": self.xi,
            "regime": self.regime.value,
            "sample_bound": self.sample_bound,
            "trials": [
                dict(t.to_json(), success=s) for t, s in zip(self.trials, self.successes)
            ],
        }
        if timing:
            out["wall_time"] = self.wall_time
        return out

    @classmethod
    def from_json(cls, data):
        trials = tuple(_pipeline_report_from_json(t) for t in data["trials"])
        return cls(
            trials=trials,
            successes=tuple(bool(t["success"]) for t in data["trials"]),
            opt_proxy=data["opt_proxy"],
            opt_source=data["opt_source"],
            success_fraction=data["success_fraction"],
            guarantee_threshold=data["guarantee_threshold"],
            alpha=data["alpha"],
            gamma_avg=data["gamma_avg"],
            eta=data["eta"],
            xi=data["xi"],
            regime=Regime(data["regime"]),
            sample_bound=data["sample_bound"],
            wall_time=data.get("wall_time", 0.0),
        )


def _pipeline_report_from_json(t):
    c = t["centers"]
    centers = CenterSet(
        indices=tuple(c["indices"]) if "indices" in c else None,
        coords=np.asarray(c["coords"]) if "coords" in c else None,
        role=CenterRole(c["role"]),
    )
    amp = t.get("amplified")
    return PipelineReport(
        centers=centers,
        sample_size=t["sample_size"],
        avg_cost_on_sample=t["avg_cost_on_sample"],
        avg_cost_on_full=t["avg_cost_on_full"],
        amplified=None if amp is None else AmplifiedPrivacy(amp["eps_prime"], amp["delta_prime"], amp["xi"]),
        regime_flag=Regime(t["regime_flag"]),
        seed=t["seed"],
        retried=t.get("retried", False),
        budget_ledger=t.get("budget_ledger"),
    )


def bound_inputs_for(space, dataset, cfg, alpha):
    """BoundInputs for the configured variant on this instance.

    Metric variants use the ground-set diameter and |V|; Euclidean variants
    use the dataset diameter and the dimension.
    """
    if cfg.variant.is_euclid:
        if not space.is_euclidean:
            raise ValidationError(f"{cfg.variant.value} needs a Euclidean dataset")
        return BoundInputs(M=dataset.diameter, alpha=alpha, gamma=cfg.gamma, k=cfg.k,
                           eta=cfg.eta, theta=cfg.theta, d=space.dimension, c=cfg.c)
    return BoundInputs(M=space.diameter, alpha=alpha, gamma=cfg.gamma, k=cfg.k,
                       eta=cfg.eta, theta=cfg.theta, n=space.n, c=cfg.c)


def optimum_proxy(space, dataset, k, objective, base_seed=0, runs=PROXY_RUNS):
    """Exact optimum when enumerable, else best of ``runs`` local searches."""
    if math.comb(space.n, k) <= MAX_ENUMERATION:
        return brute_force_opt(space, dataset, k, objective).optimum_avg_cost, "oracle"
    cost = cost_function(objective)
    best = math.inf
    for r in range(runs):
        rng = np.random.default_rng(np.random.SeedSequence([int(base_seed), 0x0B7, r]))
        centers = local_search(space, dataset, k, rng=rng, objective=objective)
        best = min(best, cost(dataset, centers))
    return best, f"local-search-best-of-{runs}"


def run_experiment(cfg, instance=None):
    """Run ``cfg.trials`` seeded pipelines and score them against the guarantee.

    Trial i uses seed base_seed + i. A trial succeeds when its full-data
    average cost is at most alpha * opt_proxy + gamma / E|S| + eta.
    """
    start = time.perf_counter()
    if instance is None:
        instance = generate_synthetic(
            cfg.generator, np.random.default_rng(np.random.SeedSequence([int(cfg.base_seed), 0x6E4]))
        )
    space, dataset = instance
    box = make_black_box(cfg.algorithm, cfg.objective, cfg.k, eps=cfg.eps, delta=cfg.delta,
                         alpha=cfg.alpha, gamma=cfg.gamma, rounds=cfg.rounds)
    alpha = box.meta.alpha
    bound = None
    if cfg.xi is None:
        bound = sample_size(cfg.variant, bound_inputs_for(space, dataset, cfg, alpha))
        xi, regime = choose_xi_from_bound(bound, dataset.size)
    else:
        xi = float(cfg.xi)
        regime = Regime.FULL_DATA if xi == 1 else Regime.SUBLINEAR
    opt, source = optimum_proxy(space, dataset, cfg.k, cfg.objective, cfg.base_seed, cfg.proxy_runs)
    gamma_avg = cfg.gamma / (xi * dataset.size)
    threshold = alpha * opt + gamma_avg + cfg.eta
    reports = []
    for i in range(int(cfg.trials)):
        seed = (int(cfg.base_seed) + i) % 2**64
        reports.append(run_pipeline(space, dataset, PipelineConfig(xi=xi, blackbox=box, seed=seed)))
    successes = tuple(r.avg_cost_on_full <= threshold for r in reports)
    return ExperimentReport(
        trials=tuple(reports),
        successes=successes,
        opt_proxy=opt,
        opt_source=source,
        success_fraction=sum(successes) / len(successes),
        guarantee_threshold=threshold,
        alpha=alpha,
        gamma_avg=gamma_avg,
        eta=cfg.eta,
        xi=xi,
        regime=regime,
        sample_bound=None if bound is None else bound.to_json(),
        wall_time=time.perf_counter() - start,
    )


def report_rows(report):
    for t, ok in zip(report.trials, report.successes):
        amp = t.amplified
        yield [
            t.seed,
            t.sample_size,
            fmt_real(t.avg_cost_on_sample),
            fmt_real(t.avg_cost_on_full),
            "" if amp is None else fmt_real(amp.eps_prime),
            "" if amp is None else fmt_real(amp.delta_prime),
            int(ok),
        ]


def render_report(report, fmt="json", timing=True):
    if fmt == "json":
        return dumps(report.to_json(timing=timing))
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        writer.writerows(report_rows(report))
        return buf.getvalue()
    raise ValidationError(f"unknown report format {fmt!r}")


def emit_report(report, fmt, path, timing=True):
    """Write the report as nested JSON or one CSV row per trial."""
    text = render_report(report, fmt, timing)
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise ReportIOError(f"cannot write {path}: {exc}") from exc
    return Path(path)
