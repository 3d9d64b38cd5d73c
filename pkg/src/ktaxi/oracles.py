"""Independent reference computations used to cross-check the main code.

Each routine here is deliberately naive: exhaustive enumeration or a dense
linear solve, sharing no logic with the modules it checks.
"""
from __future__ import annotations

import itertools

import numpy as np

from .core import Request


def brute_force_opt(metric, cfg0, seq, mode: str = "hard") -> float:
    """Enumerate all ``k**n`` taxi assignments."""
    seq = [r if isinstance(r, Request) else Request(*r) for r in seq]
    best = float("inf")
    for choice in itertools.product(range(len(cfg0)), repeat=len(seq)):
        cfg = list(cfg0)
        cost = 0.0
        for r, i in zip(seq, choice):
            cost += metric.distance(cfg[i], r.start)
            if mode == "easy":
                cost += metric.distance(r.start, r.dest)
            cfg[i] = r.dest
        best = min(best, cost)
    return best if seq else 0.0


def unrestricted_opt(matrix, cfg0, seq) -> float:
    """Hard-cost optimum on an explicit metric allowing arbitrary free
    repositioning of every taxi between requests (not only lazy moves)."""
    d = np.asarray(matrix, dtype=float)
    n, k = d.shape[0], len(cfg0)
    states = list(itertools.combinations_with_replacement(range(n), k))

    def match(X, Y):
        return min(sum(d[X[i], Y[j]] for i, j in enumerate(p)) for p in itertools.permutations(range(k)))

    move = {(X, Y): match(X, Y) for X in states for Y in states}
    val = {X: move[(tuple(sorted(cfg0)), X)] for X in states}
    for r in seq:
        s, t = r if not isinstance(r, Request) else (r.start, r.dest)
        served = {}
        for X, c in val.items():
            for i in range(k):
                Y = tuple(sorted(X[:i] + X[i + 1:] + (t,)))
                v = c + d[X[i], s]
                if v < served.get(Y, float("inf")):
                    served[Y] = v
        val = {Y: min(served[X] + move[(X, Y)] for X in served) for Y in states}
    return min(val.values())


def kirchhoff_flow(edges, root, sinks):
    """Solve the node-potential equations of a resistor network.

    ``edges`` is a list of ``(u, v, resistance)`` with positive resistances.
    A unit current enters at ``root``; all ``sinks`` are held at potential 0.
    Returns ``(effective resistance, {sink: current})``.
    """
    sinks = set(sinks)
    if root in sinks:
        return 0.0, {root: 1.0}
    nodes = sorted({u for e in edges for u in e[:2]} - sinks, key=repr)
    idx = {v: i for i, v in enumerate(nodes)}
    L = np.zeros((len(nodes), len(nodes)))
    for u, v, r in edges:
        if r <= 0:
            raise ValueError("kirchhoff_flow needs positive resistances")
        g = 1.0 / r
        for a, b in ((u, v), (v, u)):
            if a in idx:
                L[idx[a], idx[a]] += g
                if b in idx:
                    L[idx[a], idx[b]] -= g
    rhs = np.zeros(len(nodes))
    rhs[idx[root]] = 1.0
    phi = np.linalg.solve(L, rhs)
    current = {s: 0.0 for s in sinks}
    for u, v, r in edges:
        for a, b in ((u, v), (v, u)):
            if b in sinks and a in idx:
                current[b] += phi[idx[a]] / r
    return float(phi[idx[root]]), current
