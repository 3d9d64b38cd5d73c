"""Oblivious stress sequences against memoryless algorithms on binary HSTs.

The construction recurses on the two halves of the tree.  In the half
holding the special leaf ``l`` it builds a sequence for the algorithm
conditioned on one parked taxi at the mirror leaf ``r``, and symmetrically
in the other half.  Monte Carlo replays estimate how often the full
algorithm pulls the parked taxi across; the sequence then either lures and
punishes those crossings (aggressive algorithms) or alternates between the
halves often enough that refusing to cross is expensive (timid ones).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core import FixedSource, simple, simulate
from ..metric.hst import HstMetric, HstTree
from ..offline import ResourceError
from .notation import concat, mirror_leaf, relocation_batch, repeat, simple_batch

DEFAULT_MAX_LENGTH = 2_000_000


class ConditionedAlgorithm:
    """Runs ``base`` with an extra parked taxi at ``fixed``, rejecting any
    decision that would move it.  Falls back to the nearest taxi when every
    draw picks the parked one."""

    def __init__(self, base, fixed, tries: int = 64):
        self.base = base
        self.fixed = fixed
        self.tries = tries
        self.memoryless = getattr(base, "memoryless", False)
        self.name = f"{getattr(base, 'name', 'algo')}|{fixed}"
        self.fallbacks = 0

    def start(self, cfg0, metric):
        self.metric = metric
        self.base.start(tuple(cfg0) + (self.fixed,), metric)

    def serve(self, cfg, req, rng) -> int:
        full = tuple(cfg) + (self.fixed,)
        for _ in range(self.tries):
            i = int(self.base.serve(full, req, rng))
            if i < len(cfg):
                return i
        self.fallbacks += 1
        return min(range(len(cfg)), key=lambda j: (self.metric.distance(cfg[j], req.start), j))


@dataclass
class StressParams:
    N: int
    m: int = 3
    budget: int = 200
    max_length: int = DEFAULT_MAX_LENGTH

    def __post_init__(self):
        if self.N < 1 or self.m < 1 or self.budget < 1:
            raise ValueError("N, m and budget must be positive")

    @property
    def alpha(self) -> float:
        return float(self.N ** 2)


@dataclass
class StressResult:
    C: tuple
    sigma: list
    case: int = 0
    p_rl: float = 0.0
    p_lr: float = 0.0
    samples: int = 0
    children: list = field(default_factory=list)

    def __iter__(self):
        return iter((self.C, self.sigma))


def _guard(n: int, cap: int, what: str, estimates=None):
    if n > cap:
        raise ResourceError(f"{what} would have {n} requests (cap {cap}); estimates {estimates}")


def _rep(seq, times: int, cap: int, estimates=None):
    _guard(len(seq) * times, cap, "repetition", estimates)
    return repeat(seq, times)


def _vacate_rate(algo, cfg0, fixed, seq, metric, budget: int, rng) -> float:
    """Fraction of replays that end with no taxi at ``fixed``."""
    hits = 0
    for child in rng.spawn(budget):
        tr = simulate(algo, FixedSource(seq), cfg0, metric, child)
        hits += fixed not in tr.final
    return hits / budget


def _build(algo, tree: HstTree, metric, node: int, K: int, ell, params: StressParams, rng) -> StressResult:
    if K == 1:
        a, b = tree.children[node]
        r = b if ell == a else a
        return StressResult((r,), repeat([simple(ell), simple(r)], params.N))

    left, right = tree.children[node]
    if ell not in tree.subtree_leaves(left):
        left, right = right, left
    r = mirror_leaf(tree, ell, node)
    m, cap = params.m, params.max_length

    rl = _build(ConditionedAlgorithm(algo, r), tree, metric, left, K - 1, ell, params, rng)
    lr = _build(ConditionedAlgorithm(algo, ell), tree, metric, right, K - 1, r, params, rng)
    C_rl, C_lr = rl.C, lr.C
    lure_rl = concat(rl.sigma, _rep(simple_batch(C_rl), m, cap))
    lure_lr = concat(lr.sigma, _rep(simple_batch(C_lr), m, cap))

    floor = 1.0 / (4 * params.budget)
    p_rl = _vacate_rate(algo, C_rl + (r,), r, lure_rl, metric, params.budget, rng)
    p_lr = _vacate_rate(algo, C_lr + (ell,), ell, lure_lr, metric, params.budget, rng)
    p_rl = 0.0 if p_rl < floor else p_rl
    p_lr = 0.0 if p_lr < floor else p_lr
    est = {"p_rl": p_rl, "p_lr": p_lr}

    to_lr = relocation_batch(C_rl, C_lr)
    to_rl = relocation_batch(C_lr, C_rl)
    half = 2 ** (K - 1)
    alpha = int(round(params.alpha))
    if p_rl + p_lr > half / params.N and p_rl > 0 and p_lr > 0:
        case = 1
        sig_r = concat(lure_rl, to_lr, _rep(lure_lr, m, cap, est), to_rl)
        sig_l = concat(lure_lr, to_rl, _rep(lure_rl, m, cap, est), to_lr)
        _guard(alpha * (len(sig_r) + len(sig_l)), cap, "sequence", est)
        sigma = concat(repeat(sig_r, alpha), to_lr, repeat(simple_batch(C_lr + (ell,)), m),
                       repeat(sig_l, alpha), to_rl)
    else:
        case = 2
        sig_l = concat(_rep(lure_rl, m, cap, est), to_lr)
        sig_r = concat(_rep(lure_lr, m, cap, est), to_rl)
        sigma = _rep(concat(sig_l, sig_r), half * params.N, cap, est)
    return StressResult(C_rl + (r,), sigma, case, p_rl, p_lr, 2 * params.budget, [rl, lr])


def memoryless_stress_sequence(algo, K: int, params: StressParams, rng: np.random.Generator,
                               tree: HstTree | None = None, ell=None) -> StressResult:
    """Build ``(C, sigma)`` for ``K`` taxis on the binary HST of depth ``K``
    with ratio ``N**2``.  ``algo`` must be memoryless."""
    if not getattr(algo, "memoryless", False):
        raise ValueError(f"{getattr(algo, 'name', algo)!r} is not memoryless")
    if tree is None:
        from ..metric.hst import binary_hst
        tree = binary_hst(K, params.alpha)
    if tree.height != K:
        raise ValueError(f"tree depth {tree.height} does not match K={K}")
    metric = HstMetric(tree)
    ell = tree.leaves[0] if ell is None else ell
    return _build(algo, tree, metric, tree.root, K, ell, params, rng)
