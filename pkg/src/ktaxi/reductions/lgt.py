"""Layered graph traversal driven by a hard k-taxi algorithm.

The layered tree has 0/1 edge weights.  Contracting weight-0 edges maps it
onto a tree with unit edges (built lazily, one location per contracted
class), which is the metric the taxi algorithm runs on.  Before each layer
is entered, the taxis cover every node of the newest revealed layer.  A
simple request at the searcher's node pulls some taxi back; the searcher
walks to the node that taxi came from, which reveals the next layer, and
relocations restore the cover.  The searcher's walk costs exactly the
taxis' hard cost.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..core import ProtocolError, Request, Step, Transcript, apply_request, simple
from ..metric.spaces import MetricError, MetricSpace


class LayeredTreeError(ValueError):
    """The layered tree breaks the width bound or the 0/1 normal form."""


class UnitTreeMetric(MetricSpace):
    """Tree with unit-length edges, grown one child at a time."""

    kind = "unit_tree"

    def __init__(self):
        self.parent = [-1]
        self.depth = [0]

    def add_child(self, u: int) -> int:
        self.parent.append(u)
        self.depth.append(self.depth[u] + 1)
        return len(self.parent) - 1

    def contains(self, p) -> bool:
        return isinstance(p, (int, np.integer)) and 0 <= p < len(self.parent)

    def points(self) -> list:
        return list(range(len(self.parent)))

    def _dist(self, p, q) -> float:
        if not (self.contains(p) and self.contains(q)):
            raise MetricError(f"unknown point {p!r} or {q!r}")
        steps = 0
        while p != q:
            if self.depth[p] >= self.depth[q]:
                p = self.parent[p]
            else:
                q = self.parent[q]
            steps += 1
        return float(steps)


@dataclass
class LayeredTree:
    """Nodes carry a parent and a 0/1 weight on the edge to it; node 0 is ``s``."""

    parent: list = field(default_factory=lambda: [-1])
    weight: list = field(default_factory=lambda: [0])
    layers: list = field(default_factory=lambda: [[0]])
    target: int | None = None

    def add_node(self, parent: int, weight: int, layer: int) -> int:
        if weight not in (0, 1):
            raise LayeredTreeError(f"edge weight must be 0 or 1, got {weight!r}")
        if layer != self.layer_of(parent) + 1:
            raise LayeredTreeError("edges must join consecutive layers")
        while len(self.layers) <= layer:
            self.layers.append([])
        self.parent.append(parent)
        self.weight.append(weight)
        v = len(self.parent) - 1
        self.layers[layer].append(v)
        return v

    def layer_of(self, v: int) -> int:
        n = 0
        while self.parent[v] != -1:
            v = self.parent[v]
            n += 1
        return n

    def children(self, v: int) -> list[int]:
        return [u for u, p in enumerate(self.parent) if p == v]

    def width(self) -> int:
        return max(len(L) for L in self.layers)

    def validate(self, k: int | None = None):
        if self.layers[0] != [0] or self.parent[0] != -1:
            raise LayeredTreeError("layer 0 must be the single root node 0")
        for i, L in enumerate(self.layers):
            if not L:
                raise LayeredTreeError(f"layer {i} is empty")
            if k is not None and len(L) > k:
                raise LayeredTreeError(f"layer {i} has {len(L)} nodes, width bound is {k}")
        if self.target is not None and self.target not in self.layers[-1]:
            raise LayeredTreeError("target must lie in the last layer")

    def path_cost(self, v: int) -> int:
        c = 0
        while self.parent[v] != -1:
            c += self.weight[v]
            v = self.parent[v]
        return c

    # -- files ------------------------------------------------------------
    def to_dict(self) -> dict:
        return {"layers": [[[v, self.parent[v], self.weight[v]] for v in L] for L in self.layers[1:]],
                "target": self.target}

    @classmethod
    def from_dict(cls, data: dict) -> "LayeredTree":
        t = cls()
        ids = {0: 0}
        for depth, L in enumerate(data["layers"], 1):
            for v, p, w in L:
                if p not in ids:
                    raise LayeredTreeError(f"node {v} refers to unknown parent {p}")
                ids[v] = t.add_node(ids[p], int(w), depth)
        if data.get("target") is not None:
            t.target = ids[data["target"]]
        t.validate()
        return t


def save_layered_tree(tree: LayeredTree, path) -> None:
    Path(path).write_text(json.dumps(tree.to_dict(), indent=1))


def load_layered_tree(path) -> LayeredTree:
    return LayeredTree.from_dict(json.loads(Path(path).read_text()))


def lgt_offline_opt(tree: LayeredTree) -> int:
    """Cheapest root-to-target walk, computed layer by layer."""
    if tree.target is None:
        raise LayeredTreeError("tree has no target")
    best = {0: 0}
    for L in tree.layers[1:]:
        for v in L:
            best[v] = best[tree.parent[v]] + tree.weight[v]
    return best[tree.target]


# -- layer sources ----------------------------------------------------------
class FixedLayers:
    """Reveals a fully known tree; checks the 0/1 normal form against the
    searcher's actual path."""

    def __init__(self, tree: LayeredTree):
        tree.validate()
        self.tree = tree

    def reveal(self, depth: int, entered: int | None) -> list[int] | None:
        t = self.tree
        if depth >= len(t.layers):
            return None
        if entered is not None:
            for v in t.layers[depth - 1]:
                kids = t.children(v)
                if v != entered and (len(kids) > 1 or any(t.weight[u] for u in kids)):
                    raise LayeredTreeError(
                        f"node {v} off the searcher's path has {len(kids)} children / weight-1 edges")
        return t.layers[depth]


class RandomLayers:
    """Random width-``k`` tree grown in normal form around the searcher's path.

    Nodes off the path keep a weight-0 child with probability ``p_keep``; the
    entered node gets the remaining slots, each edge weight 1 with
    probability ``p_one``.  The last layer is the single target.
    """

    def __init__(self, k: int, n_layers: int, rng: np.random.Generator,
                 p_keep: float = 0.7, p_one: float = 0.5):
        if n_layers < 1:
            raise ValueError("need at least one layer beyond the root")
        self.k, self.n_layers, self.rng = k, n_layers, rng
        self.p_keep, self.p_one = p_keep, p_one
        self.tree = LayeredTree()

    def reveal(self, depth: int, entered: int | None) -> list[int] | None:
        t, rng = self.tree, self.rng
        if depth > self.n_layers:
            return None
        prev = t.layers[depth - 1]
        hub = entered if entered is not None else prev[0]
        if depth == self.n_layers:
            p = prev[rng.integers(len(prev))]
            w = int(rng.random() < self.p_one) if p == hub else 0
            t.target = t.add_node(p, w, depth)
            return t.layers[depth]
        for v in prev:
            if v != hub and rng.random() < self.p_keep:
                t.add_node(v, 0, depth)
        room = self.k - (len(t.layers[depth]) if depth < len(t.layers) else 0)
        for _ in range(rng.integers(1, room + 1) if room > 0 else 0):
            t.add_node(hub, int(rng.random() < self.p_one), depth)
        return t.layers[depth]


# -- traversal --------------------------------------------------------------
@dataclass
class LgtRun:
    cost: float
    path: list
    transcript: Transcript
    metric: UnitTreeMetric
    tree: LayeredTree

    @property
    def requests(self) -> list[Request]:
        return self.transcript.requests


def traverse_layered_tree(algo, layers, k: int, rng: np.random.Generator,
                          max_relocations: int | None = None) -> LgtRun:
    """Drive ``algo`` (a hard k-taxi algorithm) through the tree revealed by
    ``layers``; returns the searcher's walk and the taxi transcript."""
    tree = layers.tree
    metric = UnitTreeMetric()
    loc = {0: 0}
    node_of = [0] * k
    cfg = tuple([0] * k)
    algo.start(cfg, metric)
    tr = Transcript(cfg)
    cap = max_relocations if max_relocations is not None else 8 * k

    def place(v):
        p = tree.parent[v]
        loc[v] = loc[p] if tree.weight[v] == 0 else metric.add_child(loc[p])

    def issue(req):
        nonlocal cfg
        i = int(algo.serve(cfg, req, rng))
        if not 0 <= i < k:
            raise ProtocolError(f"{type(algo).__name__} returned invalid taxi {i!r}")
        new, easy, hard = apply_request(cfg, req, i, metric)
        tr.steps.append(Step(req, i, new, easy, hard))
        tr.ledger.add(easy, hard)
        cfg = new
        return i

    def cover(layer: list[int]):
        """Relocate taxis until every node of ``layer`` holds one."""
        for u in layer:
            place(u)
        free = {}
        for u in layer:                         # weight-0 children are reached for free
            if tree.weight[u] == 0:
                free.setdefault(tree.parent[u], []).append(u)
        for i in range(k):
            if free.get(node_of[i]):
                node_of[i] = free[node_of[i]].pop(0)
        for _ in range(cap + k):
            count = {u: 0 for u in layer}
            for i in range(k):
                if node_of[i] in count:
                    count[node_of[i]] += 1
            missing = [u for u in layer if count[u] == 0]
            spare = [i for i in range(k) if node_of[i] not in count]
            if not spare and missing:
                spare = [i for i in range(k) if count[node_of[i]] > 1]
            if not spare:
                return
            j = spare[0]
            dest = missing[0] if missing else layer[0]
            if cfg[j] == loc[dest]:
                node_of[j] = dest
                continue
            before = cfg
            i = issue(Request(cfg[j], loc[dest]))
            if i != j and before[i] == before[j]:
                node_of[i], node_of[j] = node_of[j], node_of[i]
            node_of[i] = dest
        raise ProtocolError("taxi algorithm keeps undoing the layer cover")

    path = [0]
    cost = 0.0
    searcher = 0
    L = layers.reveal(1, None)
    if L is None:
        return LgtRun(0.0, path, tr, metric, tree)
    if len(L) > k:
        raise LayeredTreeError(f"layer 1 has {len(L)} nodes, width bound is {k}")
    cover(L)
    depth = 1
    while True:
        i = issue(simple(loc[searcher]))
        x = node_of[i]
        cost += metric.distance(loc[searcher], loc[x])
        searcher = x
        path.append(x)
        node_of[i] = path[-2]
        if tree.target is not None and x == tree.target:
            break
        depth += 1
        L = layers.reveal(depth, x)
        if L is None:
            break
        if len(L) > k:
            raise LayeredTreeError(f"layer {depth} has {len(L)} nodes, width bound is {k}")
        cover(L)
    return LgtRun(cost, path, tr, metric, tree)

