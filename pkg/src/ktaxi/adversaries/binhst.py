"""Adaptive adversary on binary HSTs.

On a subtree of depth ``K`` holding ``K`` online taxis, the adversary keeps
``K - 1`` taxis in one half (active) and one in the other (passive).  A
phase runs the depth ``K - 1`` adversary inside the active half until the
online algorithm pulls its passive taxi over; then ``K - 1`` taxis are
relocated into the other half and the halves swap roles.  At depth 1 the
single taxi is moved off the special leaf and requests alternate between
the two leaves.

Three concrete offline schedules are maintained per level:

* ``switch``: at every phase start, bring the spare taxi to the special leaf
  of the active half and then serve the phase for free;
* ``odd``: follow the best child schedule in odd phases, serve even phases
  for free, never cross halves except by relocation;
* ``even``: the same with the parities swapped.

The certificate is the cheapest of the three.  Batch relocations start at
online taxi positions (the ``K - 1`` online taxis closest, in matching
distance, to the best child schedule's final positions) so that the online
algorithm and the augmented schedule both serve them for free.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from ..core import Request, apply_request, simple
from ..metric.hst import HstMetric, HstTree
from ..offline import min_matching
from .notation import mirror_leaf

STRATEGIES = ("switch", "odd", "even")


class Ledger:
    """A concrete offline schedule: taxi positions by identity, cost, and an
    optional per-request log of ``(repositioning moves, serving taxi)``."""

    def __init__(self, cfg0, metric, record: bool = False):
        self.cfg0 = tuple(cfg0)
        self.pos = list(cfg0)
        self.metric = metric
        self.cost = 0.0
        self.record = record
        self.log: list = []
        self._pending: list = []

    def move(self, i: int, dest):
        self.cost += self.metric.distance(self.pos[i], dest)
        self.pos[i] = dest
        if self.record:
            self._pending.append((i, dest))

    def reposition(self, target) -> list[int]:
        """Move to the multiset ``target`` along a min matching.  Returns the
        taxi assigned to each slot of ``target``."""
        k = len(target)
        cost = np.array([[self.metric.distance(p, q) for q in target] for p in self.pos])
        rows, cols = linear_sum_assignment(cost)
        slot_taxi = [0] * k
        for i, j in zip(rows, cols):
            slot_taxi[j] = int(i)
        for j, i in enumerate(slot_taxi):
            if self.pos[i] != target[j]:
                self.move(i, target[j])
        return slot_taxi

    def serve_follow(self, req: Request) -> int:
        """Serve with a taxi already at the start if there is one, else the nearest."""
        s = req.start
        at = [i for i, p in enumerate(self.pos) if p == s]
        i = at[0] if at else min(range(len(self.pos)), key=lambda j: (self.metric.distance(self.pos[j], s), j))
        self.cost += self.metric.distance(self.pos[i], s)
        self.pos[i] = req.dest
        if self.record:
            self.log.append((self._pending, i))
            self._pending = []
        return i

    def splice(self, child: "Ledger", mapping: list[int]):
        """Append a child schedule run on taxis ``mapping`` (child index -> own index)."""
        self.cost += child.cost
        for j, i in enumerate(mapping):
            self.pos[i] = child.pos[j]
        if self.record:
            for n, (moves, taxi) in enumerate(child.log):
                mv = [(mapping[a], d) for a, d in moves]
                if n == 0:
                    mv = self._pending + mv
                    self._pending = []
                self.log.append((mv, mapping[taxi]))
            self._pending += [(mapping[a], d) for a, d in child._pending]

    def clone(self) -> "Ledger":
        other = Ledger(self.cfg0, self.metric, self.record)
        other.pos, other.cost = list(self.pos), self.cost
        other.log, other._pending = list(self.log), list(self._pending)
        return other


def replay_ledger(ledger: Ledger, requests, metric) -> float:
    """Re-run a recorded schedule through :func:`apply_request`; returns its cost."""
    cfg = ledger.cfg0
    total = 0.0
    if len(ledger.log) != len(requests):
        raise ValueError(f"ledger covers {len(ledger.log)} of {len(requests)} requests")
    for req, (moves, taxi) in zip(requests, ledger.log):
        for i, dest in moves:
            total += metric.distance(cfg[i], dest)
            cfg = cfg[:i] + (dest,) + cfg[i + 1:]
        cfg, _, hard = apply_request(cfg, req, taxi, metric)
        total += hard
    for i, dest in ledger._pending:
        total += metric.distance(cfg[i], dest)
        cfg = cfg[:i] + (dest,) + cfg[i + 1:]
    return total


class _Leaf:
    """Depth-1 adversary: one taxi, two leaves."""

    def __init__(self, tree: HstTree, node: int, ell, cfg0, metric, record):
        if len(cfg0) != 1:
            raise ValueError("depth-1 adversary manages exactly one taxi")
        a, b = tree.children[node]
        self.ell = ell
        self.other = b if ell == a else a
        u = cfg0[0]
        self.queue = [] if u == self.other else [simple(u), Request(u, self.other)]
        self.flip = False
        self.ledger = Ledger(cfg0, metric, record)
        self.emitted = 0

    def next_request(self, cfg):
        if self.queue:
            req = self.queue.pop(0)
        else:
            req = simple(self.ell if not self.flip else self.other)
            self.flip = not self.flip
        self.ledger.serve_follow(req)
        self.emitted += 1
        return req

    def best_cost(self) -> float:
        return self.ledger.cost

    def finalize(self):
        pass

    def best_ledger(self) -> Ledger:
        return self.ledger


@dataclass
class _Strategy:
    name: str
    ledger: Ledger
    mode: str = "free"
    mapping: list = field(default_factory=list)


class _Level:
    """Depth ``K >= 2`` adversary on the subtree under ``node``."""

    def __init__(self, tree: HstTree, node: int, K: int, ell, cfg0, metric, record):
        self.tree, self.node, self.K, self.metric, self.record = tree, node, K, metric, record
        kids = tree.children[node]
        if len(kids) != 2:
            raise ValueError("adversary needs a binary HST")
        self.leaves = {c: set(tree.subtree_leaves(c)) for c in kids}
        self.act = next(c for c in kids if ell in self.leaves[c])
        self.ell = ell                       # special leaf of the current active half
        self.phase = 0
        self.child = None
        self.queue: list[Request] = []
        self.strategies = [_Strategy(n, Ledger(cfg0, metric, record)) for n in STRATEGIES]
        self.emitted = 0
        self._rebalance(cfg0)

    @property
    def pas(self):
        return next(c for c in self.tree.children[self.node] if c != self.act)

    def _split(self, cfg):
        act = sorted(p for p in cfg if p in self.leaves[self.act])
        pas = sorted(p for p in cfg if p in self.leaves[self.pas])
        return act, pas

    def _rebalance(self, cfg):
        """Queue relocations so that exactly one taxi sits in the passive half."""
        act, pas = self._split(cfg)
        if not pas:
            x = act[-1]
            self.queue += [simple(x), Request(x, mirror_leaf(self.tree, x, self.node))]
        for x in pas[1:]:
            self.queue += [simple(x), Request(x, mirror_leaf(self.tree, x, self.node))]

    def _emit(self, req: Request, follow_all: bool) -> Request:
        for st in self.strategies:
            if follow_all or st.mode == "free":
                st.ledger.serve_follow(req)
        self.emitted += 1
        return req

    def _start_phase(self, cfg):
        act, pas = self._split(cfg)
        self.phase += 1
        spare = pas[0]                       # where the passive online taxi waits
        self.spare = spare
        self.child = make_level(self.tree, self.act, self.K - 1, self.ell, tuple(act),
                                self.metric, self.record)
        for st in self.strategies:
            copy = (st.name == "odd" and self.phase % 2 == 1) or (st.name == "even" and self.phase % 2 == 0)
            st.mode = "copy" if copy else "free"
            target = list(act) + [spare if copy else self.ell]
            slots = st.ledger.reposition(target)
            st.mapping = slots[:-1]

    def _end_phase(self, cfg):
        self.child.finalize()
        best = self.child.best_ledger()
        for st in self.strategies:
            if st.mode == "copy":
                st.ledger.splice(best, st.mapping)
                st.mode = "free"
        act, _ = self._split(cfg)
        final = list(best.pos)
        drop = min(range(len(act)),
                   key=lambda j: (min_matching(self.metric, act[:j] + act[j + 1:], final), j))
        sources = act[:drop] + act[drop + 1:]
        for x in sources:
            self.queue += [simple(x), Request(x, mirror_leaf(self.tree, x, self.node))]
        self.child = None
        self.ell = self.spare                # the old spare leaf lies in the next active half
        self.act = self.pas

    def next_request(self, cfg) -> Request:
        if self.queue:
            return self._emit(self.queue.pop(0), True)
        if self.child is None:
            act, pas = self._split(cfg)
            if len(pas) != 1:
                self._rebalance(cfg)
                return self._emit(self.queue.pop(0), True)
            self._start_phase(cfg)
        act, _ = self._split(cfg)
        if len(act) == self.K:               # the passive taxi was pulled over
            self._end_phase(cfg)
            return self._emit(self.queue.pop(0), True)
        return self._emit(self.child.next_request(tuple(act)), False)

    # -- certificates -----------------------------------------------------
    def strategy_costs(self) -> dict:
        live = self.child.best_cost() if self.child is not None else 0.0
        return {st.name: st.ledger.cost + (live if st.mode == "copy" else 0.0) for st in self.strategies}

    def best_cost(self) -> float:
        return min(self.strategy_costs().values())

    def finalize(self):
        """Fold an unfinished phase into the copying schedules."""
        if self.child is None:
            return
        self.child.finalize()
        best = self.child.best_ledger()
        for st in self.strategies:
            if st.mode == "copy":
                st.ledger.splice(best, st.mapping)
                st.mode = "free"
        self.child = None

    def best_ledger(self) -> Ledger:
        return min((st.ledger for st in self.strategies), key=lambda lg: lg.cost)


def make_level(tree, node, K, ell, cfg0, metric, record):
    if K == 1:
        return _Leaf(tree, node, ell, cfg0, metric, record)
    return _Level(tree, node, K, ell, cfg0, metric, record)


class BinHstAdversary:
    """Adaptive request source for ``K`` taxis on the binary HST of depth ``K``.

    The adversary is built on the first request from the realized online
    configuration; ``cost()`` is the cheapest of the offline schedules.
    """

    adaptive = True

    def __init__(self, tree: HstTree, ell=None, record: bool = False):
        self.tree = tree
        self.metric = HstMetric(tree)
        self.K = tree.height
        self.ell = tree.leaves[0] if ell is None else ell
        self.record = record
        self.root = None
        self.requests: list[Request] = []
        if any(len(tree.children[u]) not in (0, 2) for u in tree.order):
            raise ValueError("adversary needs a binary HST")

    def next_request(self, cfg) -> Request:
        if len(cfg) != self.K:
            raise ValueError(f"expected {self.K} taxis, got {len(cfg)}")
        if self.root is None:
            self.cfg0 = tuple(cfg)
            self.root = make_level(self.tree, self.tree.root, self.K, self.ell, tuple(cfg),
                                   self.metric, self.record)
        req = self.root.next_request(tuple(cfg))
        if self.record:
            self.requests.append(req)
        return req

    def cost(self) -> float:
        return 0.0 if self.root is None else self.root.best_cost()

    def strategy_costs(self) -> dict:
        if self.root is None or self.K == 1:
            return {"follow": self.cost()}
        return self.root.strategy_costs()

    @property
    def phases(self) -> int:
        return getattr(self.root, "phase", 0)

    def finalize(self) -> Ledger | None:
        if self.root is None:
            return None
        self.root.finalize()
        return self.root.best_ledger()

    def ledgers(self) -> dict:
        """Finalized schedules by strategy (call after the run)."""
        self.root.finalize()
        if self.K == 1:
            return {"follow": self.root.ledger}
        return {st.name: st.ledger for st in self.root.strategies}
