"""Randomized invariant and potential suites.

Each suite draws instances from a caller-supplied rng and returns a flat
dict of worst-case margins, so both the ``verify`` command and the test
suite can assert on them.  Positive ``max_*`` entries are violations.
"""
from __future__ import annotations

import numpy as np
from scipy.optimize import linear_sum_assignment

from ..algorithms.biased_dc import BiasedDC
from ..algorithms.flow import flow_expected_quantities, flow_probabilities
from ..algorithms.region_tracker import RegionTracker, check_state, sigma, tracker_potentials
from ..core import Request, apply_request, normalize_sequence, simple
from ..metric.hst import HstMetric, random_hst
from ..metric.network import steiner_tree
from ..metric.spaces import LineMetric
from ..offline import min_matching, opt_cost, opt_schedule
from ..oracles import brute_force_opt, kirchhoff_flow

TOL = 1e-9


# -- Flow -------------------------------------------------------------------
def random_flow_instance(rng, k_choices=(2, 3, 4), max_height=4, alphas=(2.0, 4.0)):
    """``(tree, online cfg, adversary cfg, s)``; the adversary holds a taxi at ``s``
    and the online one does not."""
    k = int(rng.choice(k_choices))
    tree = random_hst(rng, int(rng.integers(1, max_height + 1)), float(rng.choice(alphas)))
    leaves = tree.leaves
    while True:                             # a taxi already at s makes the step trivial
        X = tuple(int(v) for v in rng.choice(leaves, k))
        free = [v for v in leaves if v not in X]
        if free:
            break
    s = int(rng.choice(free))
    Y = (s,) + tuple(int(v) for v in rng.choice(leaves, k - 1))
    return tree, X, Y, s


def matched_leaf(metric, X, Y, s):
    """Online taxi leaf paired with the adversary's taxi at ``s`` in a min matching."""
    cost = np.array([[metric.distance(x, y) for y in Y] for x in X])
    rows, cols = linear_sum_assignment(cost)
    j = list(Y).index(s)
    return X[int(rows[list(cols).index(j)])]


def flow_potential_terms(tree, X, Y, s):
    """``(E[cost], E[dM], c, m, R, kappa)`` for Flow serving ``s`` from ``X``."""
    metric = HstMetric(tree)
    net = steiner_tree(tree, s, X)
    probs = flow_probabilities(net)
    M0 = min_matching(metric, X, Y)
    e_cost = e_dm = 0.0
    for leaf, p in probs.items():
        moved = list(X)
        moved[moved.index(leaf)] = s
        e_cost += p * metric.distance(leaf, s)
        e_dm += p * (min_matching(metric, moved, Y) - M0)
    c, m, R = flow_expected_quantities(net, matched_leaf(metric, X, Y, s))
    return e_cost, e_dm, c, m, R, net.kappa


def flow_suite(n: int, rng, **kw) -> dict:
    worst = dict(max_potential=-np.inf, max_ineq4=-np.inf, max_m_identity=0.0,
                 max_cost_vs_c=0.0, min_kappa_margin=np.inf, max_prob_error=0.0,
                 max_prob_sum_error=0.0, instances=n)
    for _ in range(n):
        tree, X, Y, s = random_flow_instance(rng, **kw)
        k = len(X)
        e_cost, e_dm, c, m, R, kappa = flow_potential_terms(tree, X, Y, s)
        worst["max_potential"] = max(worst["max_potential"], e_cost + (2 ** k - 1) * e_dm)
        worst["max_ineq4"] = max(worst["max_ineq4"], 2 ** (kappa - 1) * c - (2 ** kappa - 1) * R)
        worst["max_m_identity"] = max(worst["max_m_identity"], abs(m - (c - 2 * R)))
        worst["max_cost_vs_c"] = max(worst["max_cost_vs_c"], abs(e_cost - c))
        net = steiner_tree(tree, s, X)
        for _, _, r_a, h_a, kap in net.subnetworks():
            worst["min_kappa_margin"] = min(worst["min_kappa_margin"], kap * r_a - h_a)
        probs = flow_probabilities(net)
        worst["max_prob_sum_error"] = max(worst["max_prob_sum_error"], abs(sum(probs.values()) - 1.0))
        if len(probs) > 1 or s not in probs:
            r_eff, cur = kirchhoff_flow(net.edges(), net.root, sorted(net.sinks))
            err = max(abs(cur[v] - probs[v]) for v in probs)
            worst["max_prob_error"] = max(worst["max_prob_error"], err, abs(r_eff - net.resistance))
    return worst


# -- BiasedDC ---------------------------------------------------------------
def _random_run(rng, metric_kind: str, max_len: int):
    n = int(rng.integers(1, max_len + 1))
    if metric_kind == "line":
        metric = LineMetric()
        pts = [float(x) for x in np.linspace(0.0, 10.0, 11)]
    else:
        tree = random_hst(rng, int(rng.integers(1, 4)), float(rng.choice([2.0, 3.0])))
        metric = HstMetric(tree)
        pts = list(tree.leaves)
    draw = lambda: pts[int(rng.integers(len(pts)))]
    raw = []
    for _ in range(n):
        s = draw()
        raw.append(Request(s, draw()) if rng.random() < 0.3 else simple(s))
    cfg0 = (draw(), draw())
    return metric, cfg0, normalize_sequence(raw)


def biased_dc_potential_run(metric, cfg0, seq) -> float:
    """Worst ``cost + dPhi - 9 * OPT_move`` over the run, ``Phi = 3 * matching``."""
    _, offline = opt_schedule(metric, cfg0, seq)
    algo = BiasedDC()
    algo.start(cfg0, metric)
    cfg, Y = tuple(cfg0), tuple(cfg0)
    worst = -np.inf
    rng = np.random.default_rng(0)
    for req, j in zip(seq, offline):
        phi0 = 3.0 * min_matching(metric, algo.pos, Y)
        Y, _, opt_move = apply_request(Y, req, j, metric)
        i = algo.serve(cfg, req, rng)
        cfg, _, _ = apply_request(cfg, req, i, metric)
        phi1 = 3.0 * min_matching(metric, algo.pos, Y)
        worst = max(worst, algo.last_cost + phi1 - phi0 - 9.0 * opt_move)
    return worst


def biased_dc_suite(n: int, rng, max_len: int = 30) -> dict:
    worst = -np.inf
    for t in range(n):
        metric, cfg0, seq = _random_run(rng, "line" if t % 2 == 0 else "hst", max_len)
        worst = max(worst, biased_dc_potential_run(metric, cfg0, seq))
    return {"max_potential": worst, "runs": n}


# -- RegionTracker ----------------------------------------------------------
def random_line_run(rng, max_len: int, grid: int = 20, width: float = 10.0, p_reloc: float = 0.3):
    n = int(rng.integers(1, max_len + 1))
    draw = lambda: float(rng.integers(0, grid + 1)) * width / grid
    raw = []
    for _ in range(n):
        s = draw()
        raw.append(Request(s, draw()) if rng.random() < p_reloc else simple(s))
    return (draw(), draw(), draw()), normalize_sequence(raw)


def sigma_closed_form(st) -> float:
    xa = st.x[st.A - 1]
    ends = list(st.ends)
    for _ in range(2):
        ends.pop(min(range(len(ends)), key=lambda i: abs(ends[i] - xa)))
    e1, e2 = sorted(ends)
    others = [st.x[i] for i in range(3) if i != st.A - 1]
    return min(e1 - min(others), max(others) - e2)


def region_tracker_run(cfg0, seq, rng, samples: int = 4) -> dict:
    """Invariant and potential margins for one run; ``samples`` random
    offline configurations are drawn per checked step."""
    algo = RegionTracker(trace=True)
    metric = LineMetric()
    algo.start(cfg0, metric)
    cfg = tuple(cfg0)
    out = dict(violations=0, max_sigma_error=0.0, max_reloc_change=0.0, max_step_increase=-np.inf)
    lo, hi = min(min(cfg0), min(min(r) for r in seq)) - 2, max(max(cfg0), max(max(r) for r in seq)) + 2
    for req in seq:
        i = algo.serve(cfg, req, rng)
        cfg, _, _ = apply_request(cfg, req, i, metric)
        st = algo.state
        out["violations"] += len(check_state(st))
        out["max_sigma_error"] = max(out["max_sigma_error"], abs(sigma(st) - sigma_closed_form(st)))
        _, snaps = algo.trace[-1]
        for _ in range(samples):
            y = sorted(rng.uniform(lo, hi, 3))
            prev = None
            for label, snap in snaps:
                if label in ("shrink", "shift_left", "shift_right") and prev is not None:
                    ys = list(y)                # the offline server sits at the served point
                    ys[int(rng.integers(3))] = prev.x[prev.A - 1]
                    ys.sort()
                    d = tracker_potentials(snap, ys)[2] - tracker_potentials(prev, ys)[2]
                    out["max_step_increase"] = max(out["max_step_increase"], d)
                if label == "after_relocation":
                    yb = list(y)
                    a = int(rng.integers(3))
                    yb[a] = prev.x[prev.A - 1]
                    ya = list(yb)
                    ya[a] = float(req.dest)
                    d = tracker_potentials(snap, ya)[2] - tracker_potentials(prev, yb)[2]
                    out["max_reloc_change"] = max(out["max_reloc_change"], abs(d))
                prev = snap
    return out


def region_tracker_suite(n: int, rng, max_len: int = 40) -> dict:
    agg = dict(violations=0, max_sigma_error=0.0, max_reloc_change=0.0, max_step_increase=-np.inf, runs=n)
    for _ in range(n):
        cfg0, seq = random_line_run(rng, max_len)
        r = region_tracker_run(cfg0, seq, rng)
        agg["violations"] += r["violations"]
        for key in ("max_sigma_error", "max_reloc_change", "max_step_increase"):
            agg[key] = max(agg[key], r[key])
    return agg


# -- offline ----------------------------------------------------------------
def offline_suite(n: int, rng, max_k: int = 3, max_len: int = 6) -> dict:
    worst_dp = worst_easy = 0.0
    for _ in range(n):
        k = int(rng.integers(1, max_k + 1))
        if rng.random() < 0.5:
            metric = LineMetric()
            pts = [float(v) for v in range(0, 11)]
        else:
            tree = random_hst(rng, int(rng.integers(1, 4)), 2.0)
            metric = HstMetric(tree)
            pts = list(tree.leaves)
        draw = lambda: pts[int(rng.integers(len(pts)))]
        L = int(rng.integers(0, max_len + 1))
        seq = [Request(draw(), draw()) if rng.random() < 0.4 else simple(draw()) for _ in range(L)]
        cfg0 = tuple(draw() for _ in range(k))
        hard = opt_cost(metric, cfg0, seq, "hard")
        worst_dp = max(worst_dp, abs(hard - brute_force_opt(metric, cfg0, seq, "hard")))
        carried = sum(metric.distance(r.start, r.dest) for r in seq)
        worst_easy = max(worst_easy, abs(opt_cost(metric, cfg0, seq, "easy") - hard - carried))
    return {"max_dp_error": worst_dp, "max_easy_identity_error": worst_easy, "instances": n}


SUITES = {
    "flow": flow_suite,
    "biased_dc": biased_dc_suite,
    "region_tracker": region_tracker_suite,
    "offline": offline_suite,
}
