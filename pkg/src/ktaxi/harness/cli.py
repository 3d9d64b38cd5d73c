"""``ktaxi`` command line.

Exit codes: 0 success, 1 a verification suite failed, 2 invalid input,
3 an instance exceeded its resource budget.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from ..algorithms import REGISTRY, make_algorithm
from ..metric.embedding import embedding_distortion, frt_embed
from ..metric.io import load_metric, metric_to_dict
from ..metric.hst import HstMetric
from ..metric.spaces import ExplicitMetric, MetricError
from ..offline import ResourceError
from ..reductions.lgt import (FixedLayers, LayeredTreeError, RandomLayers, lgt_offline_opt,
                              load_layered_tree, save_layered_tree, traverse_layered_tree)
from .config import ConfigError, load_config
from .experiment import run_experiment
from .report import read_report_csv, write_report_csv
from .verify import SUITES

TOL = 1e-9


def _emit(obj):
    print(json.dumps(obj, indent=1, default=float))


def _finish(report, out, bound=None):
    summary = report.summary()
    if bound is not None:
        summary["bound"] = bound
    if out:
        write_report_csv(report, out)
        summary["csv"] = str(out)
    _emit(summary)
    return 0


def cmd_run(args) -> int:
    cfg = load_config(args.config, seed=args.seed, out=args.out, trials=args.trials, mode=args.mode)
    if args.workers:
        cfg.workers = args.workers
    return _finish(run_experiment(cfg), cfg.out)


def lower_bound(k: int, alpha: float) -> float:
    """Expected-cost ratio the adaptive adversary forces at depth ``k``."""
    return 2 ** k - 1 - 3 ** k / alpha


def cmd_lowerbound(args) -> int:
    metric = {"kind": "binary_hst", "height": args.k, "alpha": args.alpha}
    if args.stress:
        source = {"kind": "stress", "N": args.stress, "m": args.m, "budget": args.budget}
        metric["alpha"] = float(args.stress ** 2)
    else:
        source = {"kind": "adversary"}
    defaults = {"metric": metric, "source": source, "horizon": args.horizon,
                "algorithm": {"name": args.algorithm, "params": {}}, "workers": args.workers or 1}
    cfg = load_config(None, seed=args.seed, out=args.out, trials=args.trials, mode=args.mode,
                      defaults=defaults)
    report = run_experiment(cfg)
    return _finish(report, cfg.out, None if args.stress else lower_bound(args.k, args.alpha))


def cmd_lgt(args) -> int:
    if args.reveal == "all":
        if not args.tree:
            raise ConfigError("--reveal all needs --tree")
        tree = load_layered_tree(args.tree)
        tree.validate(args.k)
        _emit({"offline_opt": lgt_offline_opt(tree), "layers": len(tree.layers), "width": tree.width()})
        return 0
    rng = np.random.default_rng(args.seed)
    if args.tree:
        layers = FixedLayers(load_layered_tree(args.tree))
    else:
        layers = RandomLayers(args.k, args.layers, rng)
    algo = make_algorithm(args.algorithm)
    run = traverse_layered_tree(algo, layers, args.k, rng)
    out = {"cost": run.cost, "taxi_hard_cost": run.transcript.ledger.hard,
           "path": run.path, "requests": len(run.requests)}
    if run.tree.target is not None:
        out["offline_opt"] = lgt_offline_opt(run.tree)
    if args.out:
        save_layered_tree(run.tree, args.out)
        out["tree"] = args.out
    _emit(out)
    return 0


def cmd_embed(args) -> int:
    metric = load_metric(args.metric)
    if not isinstance(metric, ExplicitMetric):
        raise ConfigError("embed needs an explicit (matrix) metric")
    rng = np.random.default_rng(args.seed)
    stretch = []
    for _ in range(args.samples):
        tree, leaf_of = frt_embed(metric, rng, args.alpha)
        hi, lo = embedding_distortion(metric, tree, leaf_of)
        stretch.append(hi)
    out = {"points": metric.n, "samples": args.samples, "min_contraction": lo,
           "max_expansion": max(stretch), "mean_max_expansion": float(np.mean(stretch))}
    if args.out:
        Path(args.out).write_text(json.dumps({**metric_to_dict(HstMetric(tree)),
                                              "leaf_of": {str(p): v for p, v in leaf_of.items()}},
                                             indent=1) + "\n")
        out["tree"] = args.out
    _emit(out)
    return 0


FAIL_KEYS = ("max_potential", "max_ineq4", "max_m_identity", "max_cost_vs_c", "max_prob_error",
             "max_prob_sum_error", "max_sigma_error", "max_reloc_change", "max_step_increase",
             "max_dp_error", "max_easy_identity_error")


def suite_failures(result: dict) -> list[str]:
    bad = [k for k in FAIL_KEYS if k in result and result[k] > TOL]
    if result.get("violations"):
        bad.append("violations")
    if result.get("min_kappa_margin", 0.0) < -TOL:
        bad.append("min_kappa_margin")
    return bad


def cmd_verify(args) -> int:
    names = list(SUITES) if args.suite == "all" else [args.suite]
    rng = np.random.default_rng(args.seed)
    status = 0
    for name in names:
        res = SUITES[name](args.n, rng)
        bad = suite_failures(res)
        status |= bool(bad)
        print(f"{name}: {'FAIL ' + ','.join(bad) if bad else 'ok'}")
        _emit(res)
    return status


def cmd_report(args) -> int:
    for path in args.csv:
        report = read_report_csv(path)
        summary = {"csv": str(path), **report.summary()}
        if args.plot:
            from .plotting import plot_report
            summary["figures"] = [str(p) for p in plot_report(report, path, args.bound)]
        _emit(summary)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ktaxi", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int)
        p.add_argument("--trials", type=int)
        p.add_argument("--out")
        p.add_argument("--mode", choices=("easy", "hard"))
        p.add_argument("--workers", type=int)

    p = sub.add_parser("run", help="seeded experiment from a JSON config")
    p.add_argument("--config", required=True)
    common(p)
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("lowerbound", help="online algorithm against the binary-HST adversaries")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--alpha", type=float, default=81.0)
    p.add_argument("--horizon", type=int, default=10_000)
    p.add_argument("--algorithm", default="flow", choices=sorted(REGISTRY))
    p.add_argument("--stress", type=int, metavar="N", help="oblivious stress sequence with ratio N^2")
    p.add_argument("--m", type=int, default=3)
    p.add_argument("--budget", type=int, default=200)
    common(p)
    p.set_defaults(fn=cmd_lowerbound)

    p = sub.add_parser("lgt", help="layered graph traversal through a taxi algorithm")
    p.add_argument("--tree", help="layered tree JSON file (random tree if omitted)")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--layers", type=int, default=20)
    p.add_argument("--algorithm", default="biased_dc", choices=sorted(REGISTRY))
    p.add_argument("--reveal", choices=("online", "all"), default="online")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="save the traversed tree")
    p.set_defaults(fn=cmd_lgt)

    p = sub.add_parser("embed", help="random HST embedding of a finite metric")
    p.add_argument("--metric", required=True)
    p.add_argument("--alpha", type=float, default=2.0)
    p.add_argument("--samples", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="save the last sampled tree")
    p.set_defaults(fn=cmd_embed)

    p = sub.add_parser("verify", help="randomized invariant and potential suites")
    p.add_argument("--suite", choices=("all", *SUITES), default="all")
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("report", help="re-aggregate ratio CSVs")
    p.add_argument("csv", nargs="+")
    p.add_argument("--plot", action="store_true", help="write PNG figures next to each CSV")
    p.add_argument("--bound", type=float)
    p.set_defaults(fn=cmd_report)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ResourceError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except (ConfigError, MetricError, LayeredTreeError, ValueError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
