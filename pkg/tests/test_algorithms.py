import copy

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ktaxi.algorithms import (BiasedDC, DoubleCoverage, Flow, Greedy, RegionTracker, TrackerState,
                              check_state, competitive_constant, drift_margins, flow_expected_quantities,
                              flow_probabilities, flow_serve, make_algorithm, tracker_potentials)
from ktaxi.algorithms.region_tracker import initial_state, psi_potential, relocate, serve_simple, sigma
from ktaxi.core import FixedSource, ProtocolError, Request, normalize_sequence, simple, simulate
from ktaxi.harness.verify import flow_potential_terms, random_flow_instance, sigma_closed_form
from ktaxi.metric import ExplicitMetric, HstMetric, LineMetric, MetricError, binary_hst, steiner_tree
from ktaxi.oracles import kirchhoff_flow


def test_registry():
    assert isinstance(make_algorithm("flow"), Flow)
    assert isinstance(make_algorithm("region_tracker", c=6.0), RegionTracker)
    with pytest.raises(ValueError):
        make_algorithm("wfa")


# -- Flow ------------------------------------------------------------------------
def test_flow_single_taxi():
    tree = binary_hst(2, 2.0)
    net = steiner_tree(tree, tree.leaves[0], [tree.leaves[3]])
    assert flow_probabilities(net) == {tree.leaves[3]: pytest.approx(1.0)}
    rng = np.random.default_rng(0)
    assert all(flow_serve((tree.leaves[3],), simple(tree.leaves[0]), tree, rng) == 0 for _ in range(20))


def test_flow_occupied_leaf():
    tree = binary_hst(2, 2.0)
    cfg = (tree.leaves[0], tree.leaves[2])
    rng = np.random.default_rng(0)
    assert {flow_serve(cfg, simple(tree.leaves[2]), tree, rng) for _ in range(50)} == {1}


def test_flow_symmetric_frequencies():
    tree = binary_hst(2, 2.0)
    cfg = (tree.leaves[2], tree.leaves[3])
    rng = np.random.default_rng(123)
    n = 100_000
    hits = sum(flow_serve(cfg, simple(tree.leaves[0]), tree, rng) == 0 for _ in range(n))
    assert abs(hits / n - 0.5) <= 3 * np.sqrt(0.25 / n)


def test_flow_three_taxis_match_kirchhoff():
    tree = binary_hst(3, 2.0)
    s = tree.leaves[0]
    net = steiner_tree(tree, s, [tree.leaves[1], tree.leaves[2], tree.leaves[6]])
    _, cur = kirchhoff_flow(net.edges(), net.root, sorted(net.sinks))
    for leaf, p in flow_probabilities(net).items():
        assert p == pytest.approx(cur[leaf], abs=1e-9)


def test_flow_relocation_uses_taxi_at_start():
    tree = binary_hst(2, 2.0)
    cfg = (tree.leaves[0], tree.leaves[3])
    assert flow_serve(cfg, Request(tree.leaves[3], tree.leaves[1]), tree, np.random.default_rng(0)) == 1
    with pytest.raises(ProtocolError):
        flow_serve(cfg, Request(tree.leaves[2], tree.leaves[1]), tree, np.random.default_rng(0))


def test_flow_needs_hst():
    with pytest.raises(MetricError):
        Flow().start((0.0,), LineMetric())


def test_single_path_quantities():
    tree = binary_hst(3, 2.0)
    s, t = tree.leaves[0], tree.leaves[5]
    net = steiner_tree(tree, s, [t])
    d = tree.path_distance(s, t)
    c, m, R = flow_expected_quantities(net, t)
    assert (c, m, R) == (pytest.approx(d), pytest.approx(-d), pytest.approx(d))


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**6))
def test_flow_potential_inequalities(seed):
    tree, X, Y, s = random_flow_instance(np.random.default_rng(seed))
    k = len(X)
    e_cost, e_dm, c, m, R, kappa = flow_potential_terms(tree, X, Y, s)
    assert e_cost == pytest.approx(c, abs=1e-9)
    assert m == pytest.approx(c - 2 * R, abs=1e-9)
    assert 2 ** (kappa - 1) * c <= (2 ** kappa - 1) * R + 1e-9
    assert e_cost + (2 ** k - 1) * e_dm <= 1e-9


def test_flow_is_honestly_memoryless():
    tree = binary_hst(3, 2.0)
    m = HstMetric(tree)
    f = Flow()
    f.start((tree.leaves[0], tree.leaves[7]), m)
    for leaf in (tree.leaves[3], tree.leaves[5], tree.leaves[1]):
        f.serve((tree.leaves[0], tree.leaves[7]), simple(leaf), np.random.default_rng(0))
    fresh = Flow()
    fresh.start((tree.leaves[0], tree.leaves[7]), m)
    cfg, req = (tree.leaves[2], tree.leaves[6]), simple(tree.leaves[4])
    a = [f.serve(cfg, req, np.random.default_rng(s)) for s in range(40)]
    b = [fresh.serve(cfg, req, np.random.default_rng(s)) for s in range(40)]
    assert a == b


# -- BiasedDC --------------------------------------------------------------------
def _integrate_race(a, p, s, dt=1e-4):
    """Both taxis move toward s (passive twice as fast) until one arrives."""
    t = 0.0
    while abs(a - s) > 1e-12 and abs(p - s) > 1e-12:
        a += np.sign(s - a) * min(dt, abs(s - a))
        p += np.sign(s - p) * min(2 * dt, abs(s - p))
        t += dt
    return a, p, t


def test_biased_dc_race():
    algo = BiasedDC()
    algo.start((0.0, 6.0), LineMetric())
    algo.active = 0
    a, p, t = _integrate_race(0.0, 6.0, 3.0)
    winner = algo.serve((0.0, 6.0), simple(3.0), np.random.default_rng(0))
    assert winner == 1
    assert algo.pos[0] == pytest.approx(a, abs=1e-3) == pytest.approx(1.5, abs=1e-3)
    assert algo.last_cost == pytest.approx(3 * t, abs=1e-3) == pytest.approx(4.5, abs=1e-3)


def test_biased_dc_zero_moves():
    algo = BiasedDC()
    algo.start((2.0, 8.0), LineMetric())
    assert algo.serve((2.0, 8.0), simple(2.0), None) == 0 and algo.last_cost == 0
    assert algo.serve((2.0, 8.0), simple(8.0), None) == 1 and algo.pos == [2.0, 8.0]


def test_biased_dc_general_metric_uses_virtual_points():
    m = ExplicitMetric([[0, 4, 6], [4, 0, 3], [6, 3, 0]])
    algo = BiasedDC()
    tr = simulate(algo, FixedSource([simple(1), simple(2), simple(0)]), (0, 2), m, np.random.default_rng(0))
    assert tr.ledger.hard <= algo.nominal_cost + 1e-9


def test_biased_dc_needs_two_taxis():
    with pytest.raises(ValueError):
        BiasedDC().start((0.0,), LineMetric())


# -- Double Coverage and greedy ----------------------------------------------------
def test_dc_line():
    dc = DoubleCoverage()
    dc.start((0.0, 10.0), LineMetric())
    assert dc.serve((0.0, 10.0), simple(4.0), None) == 0
    assert dc.pos == [4.0, 6.0]
    assert dc.serve((4.0, 10.0), simple(4.0), None) == 0 and dc.pos == [4.0, 6.0]


def test_dc_single_taxi():
    dc = DoubleCoverage()
    dc.start((3.0,), LineMetric())
    assert dc.serve((3.0,), simple(-2.0), None) == 0


def test_dc_hst_runs():
    tree = binary_hst(3, 2.0)
    seq = [simple(tree.leaves[i]) for i in (0, 7, 3, 4, 1)]
    tr = simulate(DoubleCoverage(), FixedSource(seq), tuple(tree.leaves[2:5]), HstMetric(tree),
                  np.random.default_rng(0))
    assert len(tr) == 5


def test_dc_rejects_explicit_metric():
    with pytest.raises(MetricError):
        DoubleCoverage().start((0, 1), ExplicitMetric([[0, 1], [1, 0]]))


def test_greedy_ties_and_nearest():
    g = Greedy()
    g.start((0.0, 4.0, 2.0), LineMetric())
    assert g.serve((0.0, 4.0, 2.0), simple(4.0), None) == 1
    assert g.serve((0.0, 4.0, 2.0), simple(3.2), None) == 1
    assert g.serve((0.0, 4.0), simple(2.0), None) == 0


# -- RegionTracker ------------------------------------------------------------------
def test_default_constants_pass_every_drift_check():
    assert all(v >= 0 for v in drift_margins().values())
    assert 100 <= competitive_constant() <= 10_000


def test_leftmost_request():
    st_ = initial_state((2.0, 5.0, 9.0))
    cost = serve_simple(st_, -1.0)
    assert cost == pytest.approx(3.0)
    assert st_.x[0] == -1.0 and st_.r1 == -1.0 and not check_state(st_)


def test_request_on_middle_taxi():
    st_ = initial_state((2.0, 5.0, 9.0))
    assert serve_simple(st_, 5.0) == 0.0
    assert st_.A == 2 and st_.x == (2.0, 5.0, 9.0) and not check_state(st_)


def test_worked_example_state():
    st_ = TrackerState((0.0, 6.0, 10.0), (0, 1, 2), 2.0, 3.0, 6.0, 6.0, 2)
    assert not check_state(st_)
    serve_simple(st_, 4.0)
    assert st_.l2 == st_.x[1] == st_.r2 == 4.0
    assert st_.l3 > 4.0 and not check_state(st_)


def _psi_numeric(st_, y, n=200_000):
    """Midpoint quadrature of the weight functions."""
    y = sorted(y)
    lo = min(min(st_.x), min(y)) - 1
    hi = max(max(st_.x), max(y)) + 1
    z = lo + (np.arange(n) + 0.5) * (hi - lo) / n
    dz = (hi - lo) / n
    total = 0.0
    for i in (1, 2, 3):
        a, b = sorted((st_.x[i - 1], y[i - 1]))
        on = (z > a) & (z < b)
        w = np.full(n, st_.gamma)
        w[(z >= st_.l(i)) & (z <= st_.r(i))] = st_.gamma - st_.psi
        w[(z < st_.r(i - 1)) | (z > st_.l(i + 1))] = st_.gamma + st_.psi
        total += float((w * on).sum() * dz)
    return total


def test_psi_matches_quadrature():
    st_ = TrackerState((0.0, 6.0, 10.0), (0, 1, 2), 2.0, 3.0, 6.0, 6.0, 2)
    for y in [(1.0, 4.0, 12.0), (-3.0, 7.5, 8.0), (0.0, 6.0, 10.0)]:
        assert psi_potential(st_, y) == pytest.approx(_psi_numeric(st_, y), abs=1e-2)


def test_psi_zero_when_configurations_agree():
    st_ = TrackerState((0.0, 5.0, 10.0), (0, 1, 2), 1.0, 4.0, 5.0, 5.0, 2)
    assert tracker_potentials(st_, st_.x)[1] == 0.0


def test_sigma_zero_on_both_boundary_cases():
    st_ = TrackerState((0.0, 5.0, 10.0), (0, 1, 2), 0.0, 3.0, 10.0, 10.0, 3)
    assert sigma(st_) == 0.0


def test_relocation_keeps_two_endpoints_at_active():
    st_ = initial_state((2.0, 5.0, 9.0))
    serve_simple(st_, 6.0)
    relocate(st_, 1.0)
    assert not check_state(st_)
    assert st_.x[st_.A - 1] == 1.0


@settings(max_examples=80, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 20), st.integers(0, 20), st.booleans()), min_size=1, max_size=30),
       st.tuples(st.integers(0, 20), st.integers(0, 20), st.integers(0, 20)))
def test_tracker_invariants_hold(raw, start):
    seq = normalize_sequence([Request(s / 2, (t if reloc else s) / 2) for s, t, reloc in raw])
    algo = RegionTracker()
    cfg = tuple(v / 2 for v in start)
    algo.start(cfg, LineMetric())
    for req in seq:
        i = algo.serve(cfg, req, None)
        cfg = cfg[:i] + (req.dest,) + cfg[i + 1:]
        assert not check_state(algo.state)
        assert sigma(algo.state) == pytest.approx(sigma_closed_form(algo.state), abs=1e-9)
        # only the serving taxi moves physically; it sits where the tracker has it
        slot = algo.state.ids.index(i)
        assert algo.state.x[slot] == pytest.approx(req.dest)


def test_tracker_physical_cost_below_nominal():
    rng = np.random.default_rng(4)
    seq = normalize_sequence([(float(rng.integers(20)), float(rng.integers(20))) for _ in range(40)])
    algo = RegionTracker()
    tr = simulate(algo, FixedSource(seq), (0.0, 10.0, 20.0), LineMetric(), rng)
    assert tr.ledger.hard <= algo.nominal_cost + 1e-9


def test_tracker_is_not_memoryless():
    """Two runs that reach the same configuration can disagree on the next move."""
    assert RegionTracker.memoryless is False
    a, b = RegionTracker(), RegionTracker()
    line = LineMetric()
    a.start((0.0, 4.0, 10.0), line)
    b.start((0.0, 4.0, 10.0), line)
    a.serve((0.0, 4.0, 10.0), simple(4.0), None)        # b keeps A = 1
    assert (a.state.A, a.state.ends) != (b.state.A, b.state.ends)


def test_tracker_input_checks():
    with pytest.raises(MetricError):
        RegionTracker().start((0, 1, 2), ExplicitMetric(np.ones((3, 3)) - np.eye(3)))
    with pytest.raises(ValueError):
        RegionTracker().start((0.0, 1.0), LineMetric())
    with pytest.raises(ValueError):
        RegionTracker(b=2.0, c=1.0)
