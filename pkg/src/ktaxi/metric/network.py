"""Steiner subtrees of an HST viewed as resistor networks.

The network spans the request leaf ``s`` and the taxi leaves and is rooted
at ``s``.  Each edge is a resistor whose resistance is its length.  A unit
current injected at ``s`` and drained at the taxi leaves splits at every
branching node inversely proportional to the branch resistances.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable

import numpy as np

from .hst import HstTree
from .spaces import MetricError


@dataclass
class ResistanceNetwork:
    root: int
    children: dict[int, list[tuple[int, float]]]
    multiplicity: Counter
    resistance_of: dict[int, float] = field(default_factory=dict)
    height_of: dict[int, float] = field(default_factory=dict)
    kappa_of: dict[int, int] = field(default_factory=dict)

    def __post_init__(self):
        self.sinks = frozenset(self.multiplicity)
        self._order = self._postorder()
        for v in self._order:
            kids = self.children.get(v, [])
            if v in self.sinks:
                self.resistance_of[v], self.height_of[v], self.kappa_of[v] = 0.0, 0.0, 1
                continue
            if not kids:
                raise MetricError(f"network leaf {v} carries no taxi")
            branch = [length + self.resistance_of[c] for c, length in kids]
            self.resistance_of[v] = _parallel(branch)
            self.height_of[v] = min(length + self.height_of[c] for c, length in kids)
            self.kappa_of[v] = sum(self.kappa_of[c] for c, _ in kids)

    def _postorder(self) -> list[int]:
        out, stack = [], [(self.root, False)]
        while stack:
            v, done = stack.pop()
            if done:
                out.append(v)
                continue
            stack.append((v, True))
            for c, _ in self.children.get(v, []):
                stack.append((c, False))
        return out

    @property
    def nodes(self) -> list[int]:
        return list(self._order)

    @property
    def resistance(self) -> float:
        return self.resistance_of[self.root]

    @property
    def kappa(self) -> int:
        return len(self.sinks)

    def edges(self) -> list[tuple[int, int, float]]:
        return [(v, c, length) for v in self._order for c, length in self.children.get(v, [])]

    def split(self, v: int) -> list[tuple[int, float, float]]:
        """``(child, edge length, current fraction)`` for the branches below ``v``."""
        kids = self.children.get(v, [])
        branch = [length + self.resistance_of[c] for c, length in kids]
        if any(b == 0.0 for b in branch):
            zero = [i for i, b in enumerate(branch) if b == 0.0]
            return [(c, length, (1.0 / len(zero) if i in zero else 0.0))
                    for i, (c, length) in enumerate(kids)]
        inv = [1.0 / b for b in branch]
        tot = sum(inv)
        return [(c, length, x / tot) for (c, length), x in zip(kids, inv)]

    def probabilities(self) -> dict[int, float]:
        """Fraction of the unit current reaching each taxi leaf."""
        if self.root in self.sinks:
            return {self.root: 1.0}
        out: dict[int, float] = {}
        stack = [(self.root, 1.0)]
        while stack:
            v, mass = stack.pop()
            if v in self.sinks:
                out[v] = out.get(v, 0.0) + mass
                continue
            for c, _, frac in self.split(v):
                stack.append((c, mass * frac))
        return out

    def path_to(self, leaf: int) -> list[tuple[int, int, float]]:
        """Edges ``(parent, child, length)`` on the path from the root to ``leaf``."""
        parent = {c: (v, length) for v, c, length in self.edges()}
        out = []
        x = leaf
        while x != self.root:
            v, length = parent[x]
            out.append((v, x, length))
            x = v
        return out[::-1]

    def resistance_pairwise(self, rng: np.random.Generator | None = None) -> float:
        """Recompute the total resistance merging branches two at a time.

        Each merge applies ``R_A = d(s_A, s'_A) + R_B R_C / (R_B + R_C)`` with
        ``d = 0`` for the inner merges; ``rng`` shuffles the merge order.
        """
        memo: dict[int, float] = {}
        for v in self._order:
            if v in self.sinks:
                memo[v] = 0.0
                continue
            branch = [length + memo[c] for c, length in self.children[v]]
            if rng is not None:
                rng.shuffle(branch)
            acc = branch[0]
            for b in branch[1:]:
                acc = acc * b / (acc + b) if acc + b > 0 else 0.0
            memo[v] = acc
        return memo[self.root]

    # -- subnetworks ------------------------------------------------------
    def _down_sinks(self) -> dict[int, frozenset]:
        below: dict[int, frozenset] = {}
        for v in self._order:
            if v in self.sinks:
                below[v] = frozenset([v])
            else:
                below[v] = frozenset().union(*(below[c] for c, _ in self.children[v]))
        return below

    def restricted(self, top: int, taxis: Iterable[int]) -> tuple[float, float, int]:
        """``(R_A, h(A), kappa(A))`` for the union of paths from ``top`` to ``taxis``."""
        keep = frozenset(taxis)
        below = self._down_sinks()
        if not keep or not keep <= below[top]:
            raise MetricError("taxis must be non-empty and below the subnetwork top")

        def rec(v):
            if v in self.sinks:
                return 0.0, 0.0
            branch, heights = [], []
            for c, length in self.children[v]:
                if below[c] & keep:
                    r, h = rec(c)
                    branch.append(length + r)
                    heights.append(length + h)
            return _parallel(branch), min(heights)

        r, h = rec(top)
        return r, h, len(keep)

    def subnetworks(self, max_taxis: int = 8):
        """Yield ``(top, taxi subset, R_A, h(A), kappa(A))`` for every member of
        the subnetwork family (union of paths from a node to a set of taxi
        leaves below it, at least one edge)."""
        below = self._down_sinks()
        for top in self._order:
            avail = sorted(below[top])
            if len(avail) > max_taxis:
                raise MetricError("too many taxis to enumerate subnetworks")
            for r in range(1, len(avail) + 1):
                for subset in combinations(avail, r):
                    if subset == (top,):
                        continue
                    yield (top, subset) + self.restricted(top, subset)


def _parallel(branch: list[float]) -> float:
    if any(b == 0.0 for b in branch):
        return 0.0
    return 1.0 / sum(1.0 / b for b in branch)


def steiner_tree(tree: HstTree, request_leaf: int, taxi_leaves: Iterable[int]) -> ResistanceNetwork:
    """Minimal subtree spanning the request leaf and the taxi leaves, rooted at the request."""
    mult = Counter(taxi_leaves)
    if not mult:
        raise MetricError("at least one taxi leaf is required")
    for leaf in list(mult) + [request_leaf]:
        if not tree.is_leaf(leaf):
            raise MetricError(f"{leaf!r} is not a leaf of the HST")
    if request_leaf in mult:
        return ResistanceNetwork(request_leaf, {}, Counter({request_leaf: mult[request_leaf]}))
    top = request_leaf
    for leaf in mult:
        top = tree.lca(top, leaf)
    adj: dict[int, list[tuple[int, float]]] = {}
    seen = set()
    for leaf in [request_leaf, *mult]:
        x = leaf
        while x != top and x not in seen:
            seen.add(x)
            p = tree.parent[x]
            length = tree.edge_length(x)
            adj.setdefault(x, []).append((p, length))
            adj.setdefault(p, []).append((x, length))
            x = p
    children: dict[int, list[tuple[int, float]]] = {}
    stack, visited = [request_leaf], {request_leaf}
    while stack:
        v = stack.pop()
        kids = []
        for u, length in adj.get(v, []):
            if u not in visited:
                visited.add(u)
                kids.append((u, length))
                stack.append(u)
        children[v] = sorted(kids)
    return ResistanceNetwork(request_leaf, children, mult)
