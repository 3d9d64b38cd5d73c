"""Seeded batch runs and empirical competitive ratios.

Trial ``t`` of an experiment with seed ``s`` draws everything from
``default_rng(SeedSequence([s, t]))``, so trials are independent of the
worker count and of each other.  The reference cost is the offline optimum
for fixed sequences and the adversary's cheapest schedule for adaptive ones.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..adversaries import BinHstAdversary, StressParams, memoryless_stress_sequence
from ..adversaries.random import random_line_requests, random_requests
from ..algorithms import make_algorithm
from ..core import FixedSource, read_requests, simulate
from ..metric.hst import HstMetric
from ..metric.spaces import LineMetric
from ..offline import DEFAULT_STATE_CAP, ResourceError, opt_cost
from .config import ConfigError, ExperimentConfig


def trial_rng(seed: int, t: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, t]))


@dataclass
class TrialResult:
    trial: int
    alg_cost: float
    ref_cost: float
    requests: int = 0
    skipped: str | None = None

    @property
    def ratio(self) -> float | None:
        if self.skipped or not self.ref_cost > 0:
            return None
        return self.alg_cost / self.ref_cost


@dataclass
class RatioReport:
    trials: list = field(default_factory=list)
    slack: float = 0.0
    mode: str = "hard"

    @property
    def rows(self) -> list[TrialResult]:
        return [r for r in self.trials if r.skipped is None]

    @property
    def ratios(self) -> list[float]:
        return [r.ratio for r in self.rows if r.ratio is not None]

    @property
    def zero_ref(self) -> list[int]:
        return [r.trial for r in self.rows if r.ratio is None]

    @property
    def skipped(self) -> list[tuple[int, str]]:
        return [(r.trial, r.skipped) for r in self.trials if r.skipped is not None]

    @property
    def mean(self) -> float:
        return float(np.mean(self.ratios)) if self.ratios else math.nan

    @property
    def max(self) -> float:
        return float(np.max(self.ratios)) if self.ratios else math.nan

    @property
    def stderr(self) -> float:
        r = self.ratios
        return float(np.std(r, ddof=1) / math.sqrt(len(r))) if len(r) > 1 else math.nan

    @property
    def ratio_of_means(self) -> float:
        rows = self.rows
        ref = sum(r.ref_cost for r in rows)
        return sum(r.alg_cost for r in rows) / ref if ref > 0 else math.nan

    def summary(self) -> dict:
        return {"trials": len(self.trials), "ratios": len(self.ratios), "mean": self.mean,
                "max": self.max, "stderr": self.stderr, "ratio_of_means": self.ratio_of_means,
                "zero_ref": len(self.zero_ref), "skipped": len(self.skipped), "slack": self.slack}


def _initial(cfg: ExperimentConfig, metric, k: int, rng):
    if cfg.initial is not None:
        return tuple(cfg.initial)
    pts = metric.points()
    if pts is None:
        src = cfg.source
        lo, hi = float(src.get("low", 0.0)), float(src.get("high", 10.0))
        return tuple(float(x) for x in rng.uniform(lo, hi, k))
    return tuple(pts[int(i)] for i in rng.integers(len(pts), size=k))


def _random_sequence(src: dict, metric, rng):
    n = int(src.get("length", 30))
    p = float(src.get("relocation_prob", 0.3))
    if isinstance(metric, LineMetric):
        return random_line_requests(n, p, rng, float(src.get("low", 0.0)), float(src.get("high", 10.0)),
                                    src.get("grid"))
    return random_requests(src.get("points") or metric.points(), n, p, rng)


def _needs_hst(metric):
    if not isinstance(metric, HstMetric):
        raise ConfigError("adversary and stress sources need an HST metric")
    return metric.tree


def run_trial(cfg: ExperimentConfig, t: int) -> TrialResult:
    rng = trial_rng(cfg.seed, t)
    metric = cfg.build_metric()
    algo = make_algorithm(cfg.algorithm["name"], **cfg.algorithm.get("params", {}))
    src = cfg.source
    kind = src["kind"]
    cap = cfg.state_cap or DEFAULT_STATE_CAP

    if kind == "adversary":
        tree = _needs_hst(metric)
        adv = BinHstAdversary(tree, src.get("ell"))
        cfg0 = _initial(cfg, metric, tree.height, rng)
        tr = simulate(algo, adv, cfg0, metric, rng, horizon=cfg.horizon)
        ref = adv.cost()
        if cfg.mode == "easy":
            ref += sum(metric.distance(r.start, r.dest) for r in tr.requests)
        return TrialResult(t, tr.ledger.cost(cfg.mode), ref, len(tr))

    if kind == "stress":
        tree = _needs_hst(metric)
        params = StressParams(int(src.get("N", 2)), int(src.get("m", 3)), int(src.get("budget", 200)),
                              int(src.get("max_length", 2_000_000)))
        try:
            res = memoryless_stress_sequence(algo, tree.height, params, rng, tree=tree, ell=src.get("ell"))
        except ResourceError as e:
            return TrialResult(t, 0.0, 0.0, 0, f"resource: {e}")
        cfg0, seq = res.C, res.sigma
        algo = make_algorithm(cfg.algorithm["name"], **cfg.algorithm.get("params", {}))
    else:
        k = len(cfg.initial) if cfg.initial is not None else int(cfg.k)
        cfg0 = _initial(cfg, metric, k, rng)
        if kind == "file":
            seq = read_requests(cfg.resolve(src["path"]))[:cfg.horizon]
        else:
            seq = _random_sequence(src, metric, rng)

    tr = simulate(algo, FixedSource(seq), cfg0, metric, rng)
    try:
        ref = opt_cost(metric, cfg0, seq, cfg.mode, cap)
    except ResourceError as e:
        return TrialResult(t, tr.ledger.cost(cfg.mode), 0.0, len(tr), f"resource: {e}")
    return TrialResult(t, tr.ledger.cost(cfg.mode), ref, len(tr))


def run_experiment(cfg: ExperimentConfig) -> RatioReport:
    """All trials of ``cfg``, merged in trial order."""
    cfg.validate()
    idx = range(cfg.trials)
    if cfg.workers > 1 and cfg.trials > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(run_trial, [cfg] * cfg.trials, idx))
    else:
        results = [run_trial(cfg, t) for t in idx]
    return RatioReport(results, cfg.slack, cfg.mode)
