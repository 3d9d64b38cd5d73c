"""Double Coverage baselines for the line and for HSTs."""
from __future__ import annotations

from ..metric.hst import HstMetric
from ..metric.spaces import EPS, LineMetric, MetricError
from .base import Greedy, OnlineAlgorithm, relocation_taxi

__all__ = ["DoubleCoverage", "Greedy", "dc_line_step", "dc_tree_step"]


def dc_line_step(pos: list[float], s: float) -> int:
    """Move ``pos`` in place by one Double Coverage step; return the server at ``s``."""
    left = [i for i, x in enumerate(pos) if x <= s]
    right = [i for i, x in enumerate(pos) if x >= s]
    li = max(left, key=lambda i: (pos[i], -i)) if left else None
    ri = min(right, key=lambda i: (pos[i], i)) if right else None
    if li is not None and pos[li] == s:
        return li
    if ri is not None and pos[ri] == s:
        return ri
    if li is None:
        pos[ri] = s
        return ri
    if ri is None:
        pos[li] = s
        return li
    dl, dr = s - pos[li], pos[ri] - s
    step = min(dl, dr)
    pos[li] += step
    pos[ri] -= step
    if dl <= dr:
        pos[li] = s
        return li
    pos[ri] = s
    return ri


class _TreePoints:
    """Points of an HST drawn as a tree: ``(u, h)`` sits ``h`` above node ``u``
    on the edge to its parent (``h = 0`` is the node itself)."""

    def __init__(self, tree):
        self.t = tree
        self.below = {}
        for u in reversed(tree.order):
            self.below[u] = {u}.union(*(self.below[c] for c in tree.children[u]))

    def length(self, u):
        return self.t.edge_length(u)

    def to_node(self, p, x) -> float:
        u, h = p
        if h == 0:
            return self.t.path_distance(u, x)
        return min(h + self.t.path_distance(u, x),
                   self.length(u) - h + self.t.path_distance(self.t.parent[u], x))

    def dist(self, p, q) -> float:
        (u, h), (v, g) = p, q
        if u == v:
            return abs(h - g)
        if g == 0:
            return self.to_node(p, v)
        return min(g + self.to_node(p, v), self.length(v) - g + self.to_node(p, self.t.parent[v]))

    def next_stop(self, p, s):
        """Next tree node on the way from ``p`` to node ``s`` and the distance to it."""
        u, h = p
        if h > 0:
            if s in self.below[u]:
                return u, h
            return self.t.parent[u], self.length(u) - h
        if s in self.below[u]:
            c = next(c for c in self.t.children[u] if s in self.below[c])
            return c, self.length(c)
        return self.t.parent[u], self.length(u)

    def advance(self, p, s, delta):
        u, h = p
        nxt, gap = self.next_stop(p, s)
        if delta >= gap - EPS * max(1.0, gap):
            return (nxt, 0.0)
        if h > 0:
            return (u, h - delta) if nxt == u else (u, h + delta)
        if self.t.parent[nxt] == u:          # moving down into child nxt
            return (nxt, self.length(nxt) - delta)
        return (u, delta)


def dc_tree_step(tp: _TreePoints, pos: list, s) -> int:
    """Tree Double Coverage: unobstructed servers move toward ``s`` at unit speed."""
    target = (s, 0.0)
    while True:
        at = [i for i, p in enumerate(pos) if tp.dist(p, target) <= EPS]
        if at:
            pos[at[0]] = target
            return at[0]
        moving = []
        for i, p in enumerate(pos):
            di = tp.dist(p, target)
            blocked = any(
                (j < i or tp.dist(pos[j], p) > EPS)
                and tp.dist(p, pos[j]) + tp.dist(pos[j], target) <= di + EPS
                for j, q in enumerate(pos) if j != i)
            if not blocked:
                moving.append(i)
        step = min(tp.next_stop(pos[i], s)[1] for i in moving)
        for i in moving:
            pos[i] = tp.advance(pos[i], s, step)


class DoubleCoverage(OnlineAlgorithm):
    name = "dc"
    memoryless = False

    def start(self, cfg0, metric):
        super().start(cfg0, metric)
        if isinstance(metric, LineMetric):
            self.pos = [float(x) for x in cfg0]
            self.tree = None
        elif isinstance(metric, HstMetric):
            self.tp = _TreePoints(metric.tree)
            self.pos = [(x, 0.0) for x in cfg0]
            self.tree = metric.tree
        else:
            raise MetricError("Double Coverage runs on the line or on HSTs")

    def serve(self, cfg, req, rng):
        if not req.simple:
            i = relocation_taxi(cfg, req, self.metric)
            self.pos[i] = req.dest if self.tree is None else (req.dest, 0.0)
            return i
        if self.tree is None:
            return dc_line_step(self.pos, float(req.start))
        return dc_tree_step(self.tp, self.pos, req.start)
