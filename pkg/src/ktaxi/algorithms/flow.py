"""Randomized HST algorithm serving by electrical-current fractions.

A simple request at leaf ``s`` is served by the taxi at leaf ``t_i`` with
probability equal to the share of a unit current, injected at ``s``, that
drains at ``t_i`` when every tree edge is a resistor of its length.  A
relocation is served by a taxi already at its start.
"""
from __future__ import annotations

import numpy as np

from ..core import ProtocolError, Request
from ..metric.hst import HstMetric, HstTree
from ..metric.network import ResistanceNetwork, steiner_tree
from ..metric.spaces import MetricError
from .base import OnlineAlgorithm, taxis_at


def flow_probabilities(net: ResistanceNetwork) -> dict:
    """Probability of each taxi leaf: its share of the unit current."""
    return net.probabilities()


def _pick(cfg, probs: dict, rng) -> int:
    leaves = sorted(probs)
    u = rng.random()
    acc = 0.0
    chosen = leaves[-1]
    for leaf in leaves:
        acc += probs[leaf]
        if u < acc:
            chosen = leaf
            break
    at = [i for i, x in enumerate(cfg) if x == chosen]
    return at[0] if len(at) == 1 else at[int(rng.integers(len(at)))]


def flow_serve(cfg: tuple, req: Request, tree: HstTree, rng: np.random.Generator) -> int:
    if not req.simple:
        at = taxis_at(cfg, req.start)
        if not at:
            raise ProtocolError(f"relocation {req} arrived with no taxi at its start")
        return at[0]
    at = taxis_at(cfg, req.start)
    if at:
        return at[0] if len(at) == 1 else at[int(rng.integers(len(at)))]
    return _pick(cfg, flow_probabilities(steiner_tree(tree, req.start, cfg)), rng)


def flow_expected_quantities(net: ResistanceNetwork, t_s) -> tuple[float, float, float]:
    """``(c(N), m(N), R_N)`` for the network rooted at the request.

    ``c`` is the expected path length travelled by the serving taxi; ``m``
    is the same expectation with edges on the path from the root to
    ``t_s`` counted negatively (the matching-change bound).
    """
    if t_s not in net.sinks:
        raise MetricError(f"{t_s!r} is not a taxi leaf of the network")
    on_path = {c for _, c, _ in net.path_to(t_s)}
    c_of: dict = {}
    m_of: dict = {}
    for v in net.nodes:                     # postorder
        if v in net.sinks:
            c_of[v] = m_of[v] = 0.0
            continue
        c = m = 0.0
        for child, length, frac in net.split(v):
            c += frac * (length + c_of[child])
            m += frac * ((-length if child in on_path else length) + m_of[child])
        c_of[v], m_of[v] = c, m
    return c_of[net.root], m_of[net.root], net.resistance


class Flow(OnlineAlgorithm):
    name = "flow"
    memoryless = True

    def __init__(self, cache: bool = True):
        self.cache = cache
        self._probs: dict = {}

    def start(self, cfg0, metric):
        if not isinstance(metric, HstMetric):
            raise MetricError("Flow runs on HST metrics only")
        super().start(cfg0, metric)
        self.tree = metric.tree

    def probabilities(self, cfg, s) -> dict:
        key = (s, frozenset(cfg))
        p = self._probs.get(key) if self.cache else None
        if p is None:
            p = flow_probabilities(steiner_tree(self.tree, s, cfg))
            if self.cache:
                self._probs[key] = p
        return p

    def serve(self, cfg, req, rng):
        if not req.simple or req.start in cfg:
            return flow_serve(cfg, req, self.tree, rng)
        return _pick(cfg, self.probabilities(cfg, req.start), rng)
