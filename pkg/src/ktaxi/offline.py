"""Exact offline optima by dynamic programming over configurations.

Only the serving taxi ever needs to move: any schedule can be made lazy
without extra cost, so after request ``i`` some taxi sits at ``t_i`` and all
positions stay inside the initial points and request endpoints.  States are
sorted tuples (multisets).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .core import Request, canonical
from .metric.spaces import LineMetric, MetricSpace

DEFAULT_STATE_CAP = 2_000_000


class ResourceError(RuntimeError):
    """The instance exceeds the configured state budget."""


class _Dist:
    """Memoized distance lookups (the DP asks for the same pairs repeatedly)."""

    def __init__(self, metric: MetricSpace):
        self.metric = metric
        self.memo: dict = {}

    def __call__(self, p, q) -> float:
        if p == q:
            return 0.0
        key = (p, q)
        v = self.memo.get(key)
        if v is None:
            v = self.memo[key] = self.memo[(q, p)] = self.metric.distance(p, q)
        return v


def min_matching(metric: MetricSpace, X, Y) -> float:
    """Minimum-weight perfect matching between two equal-size configurations."""
    X, Y = list(X), list(Y)
    if len(X) != len(Y):
        raise ValueError(f"configuration sizes differ: {len(X)} vs {len(Y)}")
    if not X:
        return 0.0
    d = metric.distance if not isinstance(metric, _Dist) else metric
    if isinstance(getattr(d, "metric", metric), LineMetric) and all(
            isinstance(p, (int, float, np.integer, np.floating)) for p in X + Y):
        return float(sum(abs(a - b) for a, b in zip(sorted(X), sorted(Y))))
    k = len(X)
    if k <= 3:
        return min(sum(d(X[i], Y[j]) for i, j in enumerate(perm))
                   for perm in itertools.permutations(range(k)))
    cost = np.array([[d(x, y) for y in Y] for x in X])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].sum())


def _check_mode(mode):
    if mode not in ("easy", "hard"):
        raise ValueError(f"mode must be 'easy' or 'hard', got {mode!r}")


def _as_requests(seq):
    return [r if isinstance(r, Request) else Request(*r) for r in seq]


@dataclass
class _Layers:
    layers: list[dict]       # state -> (cost, prev_state, moved_from)
    carried: float


def _forward(metric, cfg0, seq, cap, keep_history=True) -> _Layers:
    d = metric if isinstance(metric, _Dist) else _Dist(metric)
    cur = {canonical(cfg0): (0.0, None, None)}
    layers = [cur]
    carried = 0.0
    total = 1
    for r in seq:
        s, t = r.start, r.dest
        carried += d(s, t)
        nxt: dict = {}
        for state, (c, _, _) in cur.items():
            for i, p in enumerate(state):
                if i and state[i - 1] == p:
                    continue
                nc = c + d(p, s)
                ns = canonical(state[:i] + state[i + 1:] + (t,))
                old = nxt.get(ns)
                if old is None or nc < old[0]:
                    nxt[ns] = (nc, state, p)
        total += len(nxt)
        if total > cap:
            raise ResourceError(f"offline DP exceeded {cap} states")
        cur = nxt
        if keep_history:
            layers.append(cur)
        else:
            layers = [cur]
    return _Layers(layers, carried)


def opt_cost(metric: MetricSpace, cfg0, seq, mode: str = "hard",
             state_cap: int = DEFAULT_STATE_CAP) -> float:
    """Optimal offline cost of serving ``seq`` from ``cfg0``."""
    _check_mode(mode)
    seq = _as_requests(seq)
    res = _forward(metric, cfg0, seq, state_cap, keep_history=False)
    best = min(c for c, _, _ in res.layers[-1].values())
    return best + (res.carried if mode == "easy" else 0.0)


def opt_cost_return(metric: MetricSpace, C, seq, mode: str = "hard",
                    state_cap: int = DEFAULT_STATE_CAP) -> float:
    """Optimal cost to serve ``seq`` from ``C`` and then return to ``C``."""
    _check_mode(mode)
    seq = _as_requests(seq)
    d = _Dist(metric)
    res = _forward(d, C, seq, state_cap, keep_history=False)
    best = min(c + min_matching(d, state, C) for state, (c, _, _) in res.layers[-1].items())
    return best + (res.carried if mode == "easy" else 0.0)


def opt_schedule(metric: MetricSpace, cfg0, seq, state_cap: int = DEFAULT_STATE_CAP):
    """Optimal hard-cost schedule as ``(cost, taxi indices)`` for the tuple ``cfg0``."""
    seq = _as_requests(seq)
    res = _forward(metric, cfg0, seq, state_cap)
    last = res.layers[-1]
    state = min(last, key=lambda x: last[x][0])
    cost = last[state][0]
    moved = []
    for layer in reversed(res.layers[1:]):
        _, prev, p = layer[state]
        moved.append(p)
        state = prev
    moved.reverse()
    cfg = list(cfg0)
    taxis = []
    for r, p in zip(seq, moved):
        i = cfg.index(p)
        taxis.append(i)
        cfg[i] = r.dest
    return cost, taxis


def work_function_table(metric: MetricSpace, cfg0, seq, configs,
                        state_cap: int = DEFAULT_STATE_CAP) -> list[dict]:
    """``w_i(C)`` for each prefix length ``i`` and each ``C`` in ``configs``.

    ``w_i(C)`` is the cheapest hard cost of serving the first ``i`` requests
    and ending in ``C``; the final repositioning is a min matching.
    """
    seq = _as_requests(seq)
    d = _Dist(metric)
    res = _forward(d, cfg0, seq, state_cap)
    configs = [canonical(c) for c in configs]
    out = []
    for layer in res.layers:
        out.append({C: min(c + min_matching(d, X, C) for X, (c, _, _) in layer.items())
                    for C in configs})
    return out


@dataclass
class FreeCheck:
    ok: bool
    taxis: list[int]
    failed_at: int | None = None

    def __bool__(self):
        return self.ok


def free_schedule_check(metric: MetricSpace, cfg0, seq, tol: float = 1e-9) -> FreeCheck:
    """Decide whether ``seq`` can be served at zero hard cost from ``cfg0``.

    A zero-cost schedule must serve every request with a taxi already at its
    start; co-located taxis are interchangeable, so the schedule is forced.
    """
    cfg = list(cfg0)
    taxis = []
    for n, r in enumerate(_as_requests(seq)):
        i = next((j for j, p in enumerate(cfg) if p == r.start), None)
        if i is None:
            i = next((j for j, p in enumerate(cfg) if metric.distance(p, r.start) <= tol), None)
        if i is None:
            return FreeCheck(False, taxis, n)
        taxis.append(i)
        cfg[i] = r.dest
    return FreeCheck(True, taxis)
