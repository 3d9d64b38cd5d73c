import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ktaxi.algorithms import BiasedDC, DoubleCoverage, Greedy
from ktaxi.algorithms.base import OnlineAlgorithm
from ktaxi.core import FixedSource, Request, normalize_sequence, simple, simulate
from ktaxi.metric import ExplicitMetric, LineMetric
from ktaxi.offline import opt_cost
from ktaxi.reductions import (FixedLayers, LayeredTree, LayeredTreeError, RandomLayers, UnitTreeMetric,
                              easy_taxi_from_kserver, lgt_offline_opt, load_layered_tree, save_layered_tree,
                              segment_points, traverse_layered_tree)


def path_tree(weights):
    t = LayeredTree()
    v = 0
    for d, w in enumerate(weights, 1):
        v = t.add_node(v, w, d)
    t.target = v
    return t


def all_path_costs(tree):
    """Cost of every root-to-node path by explicit walking."""
    out = {}
    for v in range(len(tree.parent)):
        c, u = 0, v
        while u != 0:
            c += tree.weight[u]
            u = tree.parent[u]
        out[v] = c
    return out


# -- layered trees -----------------------------------------------------------------
def test_unit_tree_metric():
    m = UnitTreeMetric()
    a = m.add_child(0)
    b = m.add_child(a)
    c = m.add_child(0)
    assert m.distance(b, c) == 3.0 and m.distance(a, a) == 0.0
    assert m.contains(c) and not m.contains(9)


def test_tree_checks():
    t = LayeredTree()
    with pytest.raises(LayeredTreeError):
        t.add_node(0, 2, 1)
    with pytest.raises(LayeredTreeError):
        t.add_node(0, 1, 2)
    for _ in range(3):
        t.add_node(0, 1, 1)
    with pytest.raises(LayeredTreeError):
        t.validate(2)
    t.validate(3)


def test_offline_opt_simple_cases():
    assert lgt_offline_opt(path_tree([1, 0, 1, 1])) == 3
    assert lgt_offline_opt(path_tree([0, 0, 0])) == 0
    with pytest.raises(LayeredTreeError):
        lgt_offline_opt(LayeredTree())


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_offline_opt_matches_path_walk(seed):
    rng = np.random.default_rng(seed)
    run = traverse_layered_tree(Greedy(), RandomLayers(2, int(rng.integers(2, 9)), rng), 2, rng)
    tree = run.tree
    assert lgt_offline_opt(tree) == all_path_costs(tree)[tree.target]


def test_tree_file_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    tree = traverse_layered_tree(Greedy(), RandomLayers(3, 6, rng), 3, rng).tree
    save_layered_tree(tree, tmp_path / "t.json")
    back = load_layered_tree(tmp_path / "t.json")
    assert back.parent == tree.parent and back.weight == tree.weight and back.target == tree.target
    bad = {"layers": [[[1, 7, 0]]], "target": 1}
    (tmp_path / "bad.json").write_text(json.dumps(bad))
    with pytest.raises(LayeredTreeError):
        load_layered_tree(tmp_path / "bad.json")


# -- traversal ----------------------------------------------------------------------
def test_single_path_cost_counts_unit_edges():
    tree = path_tree([1, 0, 1, 1, 0])
    for algo, k in ((Greedy(), 1), (BiasedDC(), 2)):
        run = traverse_layered_tree(algo, FixedLayers(tree), k, np.random.default_rng(0))
        assert run.cost == 3 and run.path[-1] == tree.target


def test_zero_weight_target_branch_is_free():
    t = LayeredTree()
    a = t.add_node(0, 0, 1)
    t.add_node(0, 1, 1)
    t.target = t.add_node(a, 0, 2)
    run = traverse_layered_tree(BiasedDC(), FixedLayers(t), 2, np.random.default_rng(0))
    assert run.cost == 0 and run.path[-1] == t.target


def test_width_violation():
    t = LayeredTree()
    for _ in range(3):
        t.add_node(0, 1, 1)
    with pytest.raises(LayeredTreeError):
        traverse_layered_tree(BiasedDC(), FixedLayers(t), 2, np.random.default_rng(0))


def test_off_path_branching_rejected():
    t = LayeredTree()
    a = t.add_node(0, 0, 1)
    b = t.add_node(0, 0, 1)
    for p in (a, b):
        t.add_node(p, 1, 2)
        t.add_node(p, 1, 2)
    with pytest.raises(LayeredTreeError):
        traverse_layered_tree(Greedy(), FixedLayers(t), 4, np.random.default_rng(0))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_traversal_cost_identity_and_offline_domination(seed):
    rng = np.random.default_rng(seed)
    run = traverse_layered_tree(BiasedDC(), RandomLayers(2, int(rng.integers(1, 9)), rng), 2, rng)
    assert run.cost == run.transcript.ledger.hard
    seq = run.requests
    assert opt_cost(run.metric, (0, 0), seq, "hard") <= lgt_offline_opt(run.tree) + 1e-9


def test_random_layers_shape():
    rng = np.random.default_rng(2)
    run = traverse_layered_tree(Greedy(), RandomLayers(3, 12, rng), 3, rng)
    run.tree.validate(3)
    assert len(run.tree.layers) == 13 and run.tree.layers[-1] == [run.tree.target]
    with pytest.raises(ValueError):
        RandomLayers(2, 0, rng)


# -- easy taxi through k-server ------------------------------------------------------
class Scripted(OnlineAlgorithm):
    """Server 1 serves every point at or beyond ``cut``; server 0 the rest."""

    name = "scripted"

    def __init__(self, cut):
        self.cut = cut

    def serve(self, cfg, req, rng):
        return 1 if req.start >= self.cut else 0


def test_segment_points():
    pts = segment_points(0.0, 6.0, 2, 3)
    assert len(pts) == 13 and pts[0] == 0.0 and pts[-1] == 6.0
    assert np.allclose(np.diff(pts), 0.5)


def test_simple_only_matches_server_run():
    seq = [simple(x) for x in (3.0, 8.0, 1.0, 5.0)]
    run = easy_taxi_from_kserver(DoubleCoverage(), 3, LineMetric(), (0.0, 10.0), seq, np.random.default_rng(0))
    direct = simulate(DoubleCoverage(), FixedSource(seq), (0.0, 10.0), LineMetric(), np.random.default_rng(0))
    assert run.swap_cost == 0.0
    assert [s.taxi for s in run.transcript.steps] == [s.taxi for s in direct.steps]
    assert run.cost == direct.ledger.easy


def test_single_block_has_no_swaps():
    seq = normalize_sequence([(0.0, 6.0)])
    run = easy_taxi_from_kserver(Scripted(cut=100.0), 3, LineMetric(), (0.0, 20.0), seq, np.random.default_rng(0))
    assert run.swap_cost == 0.0 and run.blocks == [1]
    assert run.cost == pytest.approx(run.server_cost)


def test_two_block_swap_overhead():
    seq = normalize_sequence([(0.0, 6.0)])
    run = easy_taxi_from_kserver(Scripted(cut=3.0), 3, LineMetric(), (0.0, 3.0), seq, np.random.default_rng(0))
    assert run.blocks == [2] and run.swaps == 1
    assert run.swap_cost == pytest.approx(6 / (2 * 3))
    assert run.swap_cost <= 6 / 3
    assert run.transcript.steps[-1].cfg[run.transcript.steps[-1].taxi] == 6.0


def test_reduction_input_checks():
    with pytest.raises(ValueError):
        easy_taxi_from_kserver(DoubleCoverage(), 2, ExplicitMetric([[0, 1], [1, 0]]), (0, 1), [], None)
    with pytest.raises(ValueError):
        easy_taxi_from_kserver(DoubleCoverage(), 2, LineMetric(), (0.0, 1.0), [Request(0.0, 3.0)], None)
    with pytest.raises(ValueError):
        easy_taxi_from_kserver(DoubleCoverage(), 0, LineMetric(), (0.0, 1.0), [], None)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([2, 5, 10]))
def test_easy_reduction_bound(seed, N):
    rng = np.random.default_rng(seed)
    raw = [(float(rng.integers(11)), float(rng.integers(11))) for _ in range(int(rng.integers(1, 8)))]
    seq = normalize_sequence(raw)
    cfg0 = (float(rng.integers(11)), float(rng.integers(11)))
    run = easy_taxi_from_kserver(DoubleCoverage(), N, LineMetric(), cfg0, seq, rng)
    opt = opt_cost(LineMetric(), cfg0, seq, "easy")
    assert run.cost <= run.server_cost + opt / N + 1e-9
    assert all(b <= 2 for b in run.blocks)
