"""Command-line entry point.

Every subcommand prints JSON with reals rounded to 12 significant digits.
Exit codes: 0 on success, 2 on invalid input, 3 on runtime failures.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from sublinear_dp import __version__
from sublinear_dp.blackbox import Algorithm, NON_PRIVATE, Objective, make_black_box
from sublinear_dp.bounds import DEFAULT_C, BoundInputs, Variant, sample_size
from sublinear_dp.errors import ComputationError, ValidationError
from sublinear_dp.harness import (
    ExperimentConfig,
    dumps,
    emit_report,
    generate_synthetic,
    render_report,
    run_experiment,
)
from sublinear_dp.oracle import brute_force_opt, grid_search_opt
from sublinear_dp.pipeline import (
    EmptySamplePolicy,
    PipelineConfig,
    choose_xi_from_bound,
    cost_function,
    run_pipeline,
)
from sublinear_dp.privacy import (
    PrivacySpec,
    amplify,
    group_privacy_guarantee,
    naive_group_privacy,
)

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 2, 3


def _load(args):
    return generate_synthetic({"kind": "from_file", "path": args.data, "format": args.format})


def _data_args(p):
    p.add_argument("--data", required=True, help="CSV of points, or a distance matrix with header")
    p.add_argument("--format", choices=["points", "matrix"], default="points")


def _box_args(p, algorithms=("dp-local-search", "local-search", "oracle")):
    p.add_argument("--objective", choices=[o.value for o in Objective], default="median")
    p.add_argument("--algorithm", choices=list(algorithms), default="dp-local-search")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--eps", type=float, default=1.0, help="privacy budget; 'inf' for non-private")
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--rounds", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)


def _make_box(args):
    algorithm = Algorithm(args.algorithm)
    eps = args.eps if algorithm is Algorithm.DP_LOCAL_SEARCH else NON_PRIVATE
    return make_black_box(algorithm, args.objective, args.k, eps=eps, delta=args.delta,
                          alpha=args.alpha, gamma=args.gamma, rounds=args.rounds)


def cmd_amplify(args):
    amp = amplify(PrivacySpec(args.eps, args.delta), args.xi)
    return {"eps_prime": amp.eps_prime, "delta_prime": amp.delta_prime}


def cmd_group_privacy(args):
    spec = PrivacySpec(args.eps, args.delta)
    res = group_privacy_guarantee(amplify(spec, args.xi), args.g, args.T)
    naive = naive_group_privacy(spec, args.g)[0] if spec.delta == 0 else None
    return {"eps_group": res.eps_group, "delta_group": res.delta_group, "naive_eps": naive}


def _bound_inputs(args):
    return BoundInputs(M=args.M, alpha=args.alpha, gamma=args.gamma, k=args.k, eta=args.eta,
                       theta=args.theta, n=args.n, d=args.d, c=args.c)


def cmd_sample_size(args):
    bound = sample_size(args.variant, _bound_inputs(args))
    out = bound.to_json()
    return {"s": out["s"], "dominant_term": out["dominant_term"], "inputs": out["inputs"]}


def cmd_cluster(args):
    space, data = _load(args)
    box = _make_box(args)
    centers = box(space, data, np.random.default_rng(args.seed))
    avg = cost_function(box.objective)(data, centers)
    return {
        "centers": centers.to_json(),
        "avg_cost": avg,
        "total_cost": avg * data.size,
        "budget_ledger": centers.extra.get("budget_ledger"),
    }


def cmd_oracle(args):
    space, data = _load(args)
    if args.grid_step is not None:
        result = grid_search_opt(space, data, args.k, args.objective, step=args.grid_step)
    else:
        result = brute_force_opt(space, data, args.k, args.objective)
    return result.to_json()


def cmd_pipeline(args):
    space, data = _load(args)
    box = _make_box(args)
    out = {}
    if args.auto_xi:
        alpha = box.meta.alpha
        variant = Variant(args.variant)
        if variant.is_euclid:
            inputs = BoundInputs(M=data.diameter, alpha=alpha, gamma=args.gamma, k=args.k,
                                 eta=args.eta, theta=args.theta, d=space.dimension, c=args.c)
        else:
            inputs = BoundInputs(M=space.diameter, alpha=alpha, gamma=args.gamma, k=args.k,
                                 eta=args.eta, theta=args.theta, n=space.n, c=args.c)
        bound = sample_size(variant, inputs)
        xi, _ = choose_xi_from_bound(bound, data.size)
        out["sample_bound"] = bound.to_json()
    elif args.xi is not None:
        xi = args.xi
    else:
        raise ValidationError("pass --xi or --auto-xi")
    cfg = PipelineConfig(xi=xi, blackbox=box, seed=args.seed,
                         empty_sample_policy=EmptySamplePolicy(args.empty_sample_policy))
    report = run_pipeline(space, data, cfg)
    out.update(report.to_json())
    out["diameter"] = space.diameter
    return out


def cmd_experiment(args):
    try:
        with open(args.config) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read config {args.config}: {exc}") from exc
    report = run_experiment(ExperimentConfig.from_json(raw))
    if args.output:
        emit_report(report, args.report_format, args.output, timing=args.timing)
        return {"written": args.output, "success_fraction": report.success_fraction}
    return render_report(report, args.report_format, timing=args.timing)


def build_parser():
    parser = argparse.ArgumentParser(prog="sublinear-dp", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("amplify", help="privacy of an (eps, delta) mechanism run on a Bernoulli(xi) sample")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--xi", type=float, required=True)
    p.set_defaults(func=cmd_amplify)

    p = sub.add_parser("group-privacy", help="group privacy of the subsampled mechanism")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--xi", type=float, required=True)
    p.add_argument("--g", type=int, required=True)
    p.add_argument("--T", type=int, required=True)
    p.set_defaults(func=cmd_group_privacy)

    p = sub.add_parser("sample-size", help="sample size for a target accuracy")
    p.add_argument("--variant", choices=[v.value for v in Variant], required=True)
    p.add_argument("--M", type=float, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--c", type=float, default=DEFAULT_C)
    p.set_defaults(func=cmd_sample_size)

    p = sub.add_parser("cluster", help="run one clustering black box on a dataset")
    _data_args(p)
    _box_args(p)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("oracle", help="exhaustive optimum for small instances")
    _data_args(p)
    p.add_argument("--objective", choices=[o.value for o in Objective], default="median")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--grid-step", type=float, default=None,
                   help="grid search over R^d (d, k <= 2) instead of subsets of V")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("pipeline", help="subsample, cluster, and report amplified privacy")
    _data_args(p)
    _box_args(p)
    p.add_argument("--xi", type=float, default=None)
    p.add_argument("--auto-xi", action="store_true", help="derive xi from the sample-size bound")
    p.add_argument("--variant", choices=[v.value for v in Variant], default="median-metric")
    p.add_argument("--eta", type=float, default=0.2)
    p.add_argument("--theta", type=float, default=0.1)
    p.add_argument("--c", type=float, default=DEFAULT_C)
    p.add_argument("--empty-sample-policy", choices=[e.value for e in EmptySamplePolicy],
                   default="error")
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("experiment", help="multi-trial experiment from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--report-format", choices=["json", "csv"], default="json")
    p.add_argument("--output", default=None)
    p.add_argument("--timing", action="store_true", help="include wall time (breaks byte-identical output)")
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        result = args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ComputationError, Exception) as exc:  # noqa: BLE001
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    sys.stdout.write(result if isinstance(result, str) else dumps(result))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
