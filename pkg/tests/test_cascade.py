from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from faircs.cascade import (
    MIP,
    RMPP,
    CascadeKind,
    CascadeModel,
    Evaluator,
    disparity_of,
    fairness_report,
    lift_pct,
    spread_ic,
    spread_mip,
    spread_rmpp,
)
from faircs.graph import CandidateEdge, Graph, NetworkInstance, candidate_distance_index, make_candidates
from instances import chain, random_instance, random_non_edges
from oracles import mip_spread, rmpp_spread


def _chain_instance(n=4, p=0.5, directed=True):
    g = chain(n, directed)
    groups = np.array([0] + [i % 2 for i in range(1, n)])
    groups[1] = 0
    groups[2] = 1
    return NetworkInstance(g, groups, {0}, p, 1)


def test_cascade_model_validation():
    with pytest.raises(ValueError):
        CascadeModel(CascadeKind.IC, ic_samples=0)
    assert CascadeModel("mip").kind is CascadeKind.MIP


def test_rmpp_baseline_is_p_to_the_d():
    inst = _chain_instance(3)
    idx = candidate_distance_index(inst.graph, inst.sources, [])
    f = spread_rmpp(inst, idx, [])
    assert f[2] == pytest.approx(0.25)
    assert f[0] == 0.0  # content node excluded


def test_rmpp_shortcut():
    inst = _chain_instance(4)
    cands = make_candidates([(0, 3)])
    idx = candidate_distance_index(inst.graph, inst.sources, cands)
    assert spread_rmpp(inst, idx, cands)[3] == pytest.approx(0.5)


def test_rmpp_takes_single_best_edge_never_compounds():
    # 6 nodes: s->a->b->c->d->e ; candidates s->b (d_b=1) and b->e (d_e=2 only through s->b)
    g = chain(6)
    inst = NetworkInstance(g, [0, 0, 1, 0, 1, 1], {0}, 0.5, 2)
    cands = make_candidates([(0, 2), (2, 5)])
    idx = candidate_distance_index(g, inst.sources, cands)
    f = spread_rmpp(inst, idx, cands)
    want = rmpp_spread(6, g.edges(), True, {0}, 0.5, [(0, 2), (2, 5)])
    np.testing.assert_allclose(f, want)
    # MIP would chain both: e at distance 2
    assert spread_mip(inst, cands)[5] == pytest.approx(0.25)
    assert f[5] == pytest.approx(0.5**3)


def test_rmpp_unknown_edge_raises():
    inst = _chain_instance(4)
    idx = candidate_distance_index(inst.graph, inst.sources, make_candidates([(0, 3)]))
    with pytest.raises(ValueError):
        spread_rmpp(inst, idx, [CandidateEdge(0, 2, 5)])


def test_mip_matches_rmpp_without_edges_and_zero_when_unreachable():
    g = Graph(5, [(0, 1), (1, 2), (3, 4)])
    inst = NetworkInstance(g, [0, 1, 0, 1, 0], {0}, 0.5, 1)
    idx = candidate_distance_index(g, inst.sources, [])
    np.testing.assert_array_equal(spread_mip(inst, []), spread_rmpp(inst, idx, []))
    assert spread_mip(inst, [])[4] == 0.0


def test_ic_p_one_reaches_everything():
    g = Graph(5, [(0, 1), (1, 2), (3, 4)])
    inst = NetworkInstance(g, [0, 1, 0, 1, 0], {0}, 1.0, 1)
    f = spread_ic(inst, [], 100, seed=1)
    np.testing.assert_array_equal(f, [0.0, 1.0, 1.0, 0.0, 0.0])


def test_ic_single_edge_binomial():
    g = Graph(2, [(0, 1)], directed=True)
    inst = NetworkInstance(g, [0, 1], {0}, 0.5, 1)
    f = spread_ic(inst, [], 10_000, seed=3)
    assert abs(f[1] - 0.5) <= 0.015


def test_ic_deterministic_and_uses_chosen_edges():
    rng = np.random.default_rng(5)
    inst = random_instance(rng, 20, 0.15, directed=False, p=0.4)
    cands = random_non_edges(rng, inst.graph, 4)
    a = spread_ic(inst, cands, 3000, seed=9)
    b = spread_ic(inst, cands, 3000, seed=9)
    np.testing.assert_array_equal(a, b)
    with pytest.raises(ValueError):
        spread_ic(inst, [], 0, seed=0)


def test_fairness_report_examples():
    g = Graph(5, [(0, 1), (0, 2), (0, 3), (0, 4)])
    inst = NetworkInstance(g, [0, 0, 0, 1, 1], {0}, 0.5, 1)
    rep = fairness_report(inst, np.array([1.0, 0.3, 0.3, 0.3, 0.3]))
    assert rep.disparity == 0.0
    assert rep.group_avgs == pytest.approx((0.3, 0.3))
    assert rep.total_spread == pytest.approx(1.2)  # content node excluded
    rep = fairness_report(inst, np.array([0.0, 0.4, 0.4, 0.2, 0.2]))
    assert rep.disparity == pytest.approx(1.0)
    rep = fairness_report(inst, np.array([0, 0.4, 0.4, 0.4, 0.4]), baseline_spread=np.array([0, 0.2, 0.2, 0.2, 0.2]))
    assert rep.lift_pct == pytest.approx(100.0)


def test_fairness_report_infinite_and_errors():
    g = Graph(4, [(0, 1), (0, 2)])
    inst = NetworkInstance(g, [0, 0, 1, 1], {0}, 0.5, 1)
    rep = fairness_report(inst, np.array([0, 0.5, 0.0, 0.0]))
    assert rep.disparity == math.inf and rep.infinite_disparity
    assert disparity_of([0.0, 0.0]) == 0.0
    with pytest.raises(ValueError, match="lift undefined"):
        lift_pct(1.0, 0.0)
    only_sources = NetworkInstance(g, [1, 0, 0, 0], {0}, 0.5, 1)
    with pytest.raises(ValueError, match="no non-source"):
        fairness_report(only_sources, np.zeros(4))
    assert fairness_report(only_sources, np.array([0, 0.5, 0.5, 0.5]), skip_empty=True).disparity == 0.0


def test_disparity_three_groups_is_max_ratio():
    assert disparity_of([0.2, 0.3, 0.6]) == pytest.approx(2.0)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**6), st.floats(0.01, 100.0))
def test_disparity_scale_invariant(seed, c):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, 15, 0.2, n_groups=3)
    f = mip_spread(15, inst.graph.edges(), False, inst.sources, 0.5, [])
    try:
        a = fairness_report(inst, f).disparity
    except ValueError:
        return
    b = fairness_report(inst, c * f).disparity
    if math.isinf(a):
        assert math.isinf(b)
    else:
        assert b == pytest.approx(a, rel=1e-9, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.booleans())
def test_rmpp_mip_match_oracles_and_monotone(seed, directed):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, 14, 0.15, directed=directed)
    cands = random_non_edges(rng, inst.graph, 5)
    idx = candidate_distance_index(inst.graph, inst.sources, cands)
    pairs = [e.pair() for e in cands]
    np.testing.assert_allclose(spread_rmpp(inst, idx, cands),
                               rmpp_spread(14, inst.graph.edges(), directed, inst.sources, 0.5, pairs))
    np.testing.assert_allclose(spread_mip(inst, cands),
                               mip_spread(14, inst.graph.edges(), directed, inst.sources, 0.5, pairs))
    prev_r = spread_rmpp(inst, idx, [])
    prev_m = spread_mip(inst, [])
    for t in range(1, len(cands) + 1):
        r, m = spread_rmpp(inst, idx, cands[:t]), spread_mip(inst, cands[:t])
        assert (r >= prev_r).all() and (m >= prev_m).all()
        assert (r <= m + 1e-15).all()
        prev_r, prev_m = r, m


def test_evaluator_matches_direct_functions():
    rng = np.random.default_rng(8)
    inst = random_instance(rng, 30, 0.1)
    cands = random_non_edges(rng, inst.graph, 8)
    idx = candidate_distance_index(inst.graph, inst.sources, cands)
    pos = [0, 3, 5]
    chosen = [cands[j] for j in pos]
    np.testing.assert_allclose(Evaluator(inst, idx, RMPP).spread(pos), spread_rmpp(inst, idx, chosen))
    np.testing.assert_allclose(Evaluator(inst, idx, MIP).spread(pos), spread_mip(inst, chosen))
    ic = CascadeModel(CascadeKind.IC, 500)
    np.testing.assert_allclose(Evaluator(inst, idx, ic, seed=2).spread(pos), spread_ic(inst, chosen, 500, 2))
    disp, total, avgs = Evaluator(inst, idx, MIP).score(pos)
    rep = fairness_report(inst, spread_mip(inst, chosen))
    assert disp == pytest.approx(rep.disparity)
    assert total == pytest.approx(rep.total_spread)
