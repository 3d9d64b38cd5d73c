"""Sequence-building operators used by the lower-bound constructions.

``concat`` and ``repeat`` build sequences; ``relocation_batch(X, Y)`` moves
configuration ``X`` onto ``Y`` pairing both in sorted order; ``simple_batch``
turns a configuration into one simple request per point.
"""
from __future__ import annotations

from ..core import Request, normalize_sequence, simple


def concat(*parts) -> list[Request]:
    out: list[Request] = []
    for p in parts:
        out.extend(p)
    return out


def repeat(seq, m: int) -> list[Request]:
    if m < 0:
        raise ValueError("repetition count must be non-negative")
    return list(seq) * m


def simple_batch(X) -> list[Request]:
    return [simple(x) for x in sorted(X)]


def relocation_batch(X, Y, normalized: bool = True) -> list[Request]:
    """Relocations ``(x_i, y_i)`` with both sides sorted; each preceded by its
    simple twin unless ``normalized`` is false."""
    X, Y = sorted(X), sorted(Y)
    if len(X) != len(Y):
        raise ValueError("relocation batch needs equal-size configurations")
    reqs = [Request(x, y) for x, y in zip(X, Y)]
    return normalize_sequence(reqs) if normalized else reqs


def mirror_leaf(tree, leaf, node):
    """Leaf in the other child subtree of ``node`` at the same relative position."""
    kids = tree.children[node]
    if len(kids) != 2:
        raise ValueError("mirroring needs a binary node")
    a, b = (tree.subtree_leaves(c) for c in kids)
    if leaf in a:
        return b[a.index(leaf)]
    return a[b.index(leaf)]


def mirror_config(tree, X, node) -> list:
    return [mirror_leaf(tree, x, node) for x in X]
