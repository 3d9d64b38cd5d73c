"""Random hierarchical decompositions of finite metrics into HSTs.

The construction is the classic random-shift scheme (shown here for
``alpha = 2``, distances scaled so the smallest one is at least 1): draw a
random ordering of the points and a scale ``beta`` in ``[1, 2)`` with density
``1/(x ln 2)``; at level ``i`` every cluster of level ``i + 1`` is carved into
balls of radius ``beta * 2**(i - 1)`` around the points in random order.  A
level ``j`` cluster has diameter below ``2**(j + 1)``, which is the weight
given to its node, so tree distances never fall below the original ones.
"""
from __future__ import annotations

import math

import numpy as np

from .hst import HstTree
from .spaces import ExplicitMetric, MetricError


class EmbeddingError(MetricError):
    """The tree contracts some pair of points."""


def frt_embed(metric: ExplicitMetric, rng: np.random.Generator, alpha: float = 2.0):
    """Embed ``metric`` into a random HST.  Returns ``(tree, leaf_of)``.

    ``alpha`` is the scale ratio between levels (2 gives the textbook
    scheme; larger values coarsen the hierarchy and keep non-contraction).
    """
    n = metric.n
    if n < 1:
        raise MetricError("metric must contain at least one point")
    if alpha < 2:
        raise MetricError("alpha below 2 can contract pairs")
    d = metric.matrix
    if n == 1:
        return HstTree(alpha, [-1], [1.0]), {0: 0}
    positive = d[d > 0]
    if positive.size == 0:
        raise MetricError("distinct points must have positive distance")
    # unit = largest power of alpha not above the smallest distance
    unit = alpha ** math.floor(math.log(positive.min(), alpha) + 1e-12)
    diam = d.max() / unit
    top = max(1, math.ceil(math.log(diam, alpha) - 1e-12))
    order = rng.permutation(n)
    beta = alpha ** rng.uniform(0.0, 1.0)   # density 1/(x ln alpha) on [1, alpha)

    parent, weight = [-1], [unit * alpha ** (top + 1)]
    clusters = [(0, list(range(n)))]
    for level in range(top - 1, -1, -1):
        radius = beta * alpha ** (level - 1) * unit
        nxt = []
        for node, members in clusters:
            left = set(members)
            for c in order:
                if not left:
                    break
                ball = [p for p in members if p in left and d[c, p] <= radius]
                if not ball:
                    continue
                left.difference_update(ball)
                parent.append(node)
                weight.append(unit * alpha ** (level + 1))
                nxt.append((len(parent) - 1, ball))
        clusters = nxt
    leaf_of = {}
    for node, members in clusters:
        if len(members) != 1:
            raise MetricError("bottom level did not separate all points")
        leaf_of[members[0]] = node
    return HstTree(alpha, parent, weight), leaf_of


def embedding_distortion(metric: ExplicitMetric, tree: HstTree, leaf_of: dict) -> tuple[float, float]:
    """``(max expansion, min contraction)`` over all pairs, as ratios tree/original.

    Raises :class:`EmbeddingError` if some pair is contracted.
    """
    n = metric.n
    if n == 1:
        return 1.0, 1.0
    ratios = []
    for i in range(n):
        for j in range(i + 1, n):
            orig = metric.matrix[i, j]
            emb = tree.leaf_distance(leaf_of[i], leaf_of[j])
            ratios.append(emb / orig if orig > 0 else math.inf)
    lo, hi = min(ratios), max(ratios)
    if lo < 1.0 - 1e-12:
        raise EmbeddingError(f"embedding contracts a pair by factor {lo:.6g}")
    return float(hi), float(lo)
