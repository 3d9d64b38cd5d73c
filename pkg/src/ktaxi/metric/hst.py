"""Hierarchically separated trees.

An ``alpha``-HST stores a weight per node with ``w(parent) = alpha * w(child)``
and all leaves at the same depth.  The metric lives on the leaves only:
``d(p, q)`` is the weight of the least common ancestor.  The same distances
arise as a path metric when the edge from ``u`` to its parent has length
``(alpha - 1)/2 * w(u)`` for internal ``u`` and ``alpha/2 * w(u)`` for a leaf.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .spaces import MetricError, MetricSpace

REL_TOL = 1e-12


@dataclass
class HstTree:
    alpha: float
    parent: list[int]
    weight: list[float]
    children: list[list[int]] = field(init=False)
    depth: list[int] = field(init=False)
    leaves: list[int] = field(init=False)

    def __post_init__(self):
        n = len(self.parent)
        if n == 0 or len(self.weight) != n:
            raise MetricError("parent and weight lists must be non-empty and equal length")
        if not self.alpha > 1:
            raise MetricError(f"alpha must exceed 1, got {self.alpha}")
        roots = [u for u, p in enumerate(self.parent) if p < 0]
        if len(roots) != 1:
            raise MetricError("tree must have exactly one root")
        self.root = roots[0]
        self.children = [[] for _ in range(n)]
        for u, p in enumerate(self.parent):
            if p >= 0:
                if not 0 <= p < n:
                    raise MetricError(f"node {u} has invalid parent {p}")
                self.children[p].append(u)
        self.depth = [-1] * n
        order = [self.root]
        self.depth[self.root] = 0
        for u in order:
            for c in self.children[u]:
                self.depth[c] = self.depth[u] + 1
                order.append(c)
        if len(order) != n:
            raise MetricError("parent links do not form a tree")
        self.order = order
        self.leaves = [u for u in order if not self.children[u]]
        self.validate()
        self._leaf_index = {leaf: i for i, leaf in enumerate(self.leaves)}
        self._dist = self._leaf_distance_matrix()

    def validate(self):
        if len({self.depth[v] for v in self.leaves}) != 1:
            raise MetricError("HST leaves must share one depth")
        for u, p in enumerate(self.parent):
            if p >= 0:
                want = self.alpha * self.weight[u]
                if abs(self.weight[p] - want) > REL_TOL * max(abs(want), 1.0):
                    raise MetricError(f"weight of node {p} is not alpha times weight of child {u}")
        if any(w <= 0 for w in self.weight):
            raise MetricError("node weights must be positive")

    @property
    def height(self) -> int:
        return self.depth[self.leaves[0]]

    def edge_length(self, u: int) -> float:
        """Length of the edge from ``u`` to its parent."""
        if self.parent[u] < 0:
            raise MetricError("root has no parent edge")
        if self.children[u]:
            return (self.alpha - 1.0) / 2.0 * self.weight[u]
        return self.alpha / 2.0 * self.weight[u]

    def ancestors(self, u: int) -> list[int]:
        out = [u]
        while self.parent[out[-1]] >= 0:
            out.append(self.parent[out[-1]])
        return out

    def lca(self, p: int, q: int) -> int:
        while self.depth[p] > self.depth[q]:
            p = self.parent[p]
        while self.depth[q] > self.depth[p]:
            q = self.parent[q]
        while p != q:
            p, q = self.parent[p], self.parent[q]
        return p

    def path_distance(self, u: int, v: int) -> float:
        """Path-metric distance between arbitrary nodes (internal ones included)."""
        a = self.lca(u, v)
        total = 0.0
        for x in (u, v):
            while x != a:
                total += self.edge_length(x)
                x = self.parent[x]
        return total

    def _leaf_distance_matrix(self) -> np.ndarray:
        n = len(self.leaves)
        d = np.zeros((n, n))
        for i, p in enumerate(self.leaves):
            for j in range(i + 1, n):
                d[i, j] = d[j, i] = self.weight[self.lca(p, self.leaves[j])]
        return d

    def leaf_distance(self, p: int, q: int) -> float:
        try:
            return float(self._dist[self._leaf_index[p], self._leaf_index[q]])
        except KeyError:
            raise MetricError(f"{p!r} or {q!r} is not a leaf") from None

    def is_leaf(self, u) -> bool:
        return u in self._leaf_index

    def subtree_leaves(self, u: int) -> list[int]:
        stack, out = [u], []
        while stack:
            x = stack.pop()
            if self.children[x]:
                stack.extend(reversed(self.children[x]))
            else:
                out.append(x)
        return out


class HstMetric(MetricSpace):
    kind = "hst"

    def __init__(self, tree: HstTree):
        self.tree = tree

    def _dist(self, p, q) -> float:
        if p == q:
            return 0.0
        return self.tree.leaf_distance(p, q)

    def contains(self, p) -> bool:
        try:
            return self.tree.is_leaf(p)
        except TypeError:
            return False

    def points(self) -> list:
        return list(self.tree.leaves)

    def __repr__(self):
        return f"HstMetric(alpha={self.tree.alpha}, leaves={len(self.tree.leaves)})"


def uniform_hst(branching: int, height: int, alpha: float, leaf_weight: float = 1.0) -> HstTree:
    """Complete HST with ``branching`` children per internal node.

    Leaves are numbered consecutively left to right after the internal nodes
    of each level, so ``tree.leaves`` is in left-to-right order.
    """
    parent, weight = [-1], [leaf_weight * alpha ** height]
    level = [0]
    for d in range(1, height + 1):
        nxt = []
        for u in level:
            for _ in range(branching):
                parent.append(u)
                weight.append(leaf_weight * alpha ** (height - d))
                nxt.append(len(parent) - 1)
        level = nxt
    return HstTree(alpha, parent, weight)


def binary_hst(height: int, alpha: float) -> HstTree:
    """The binary HST with weights ``alpha**height, ..., alpha, 1`` from root to leaves."""
    return uniform_hst(2, height, alpha, 1.0)


def random_hst(rng: np.random.Generator, height: int, alpha: float, max_branching: int = 3,
               min_branching: int = 1, leaf_weight: float = 1.0) -> HstTree:
    """Random HST; the root always has at least two children when ``height >= 1``."""
    parent, weight = [-1], [leaf_weight * alpha ** height]
    level = [0]
    for d in range(1, height + 1):
        nxt = []
        for u in level:
            lo = max(min_branching, 2 if u == 0 else 1)
            for _ in range(int(rng.integers(lo, max(lo, max_branching) + 1))):
                parent.append(u)
                weight.append(leaf_weight * alpha ** (height - d))
                nxt.append(len(parent) - 1)
        level = nxt
    return HstTree(alpha, parent, weight)
