import math

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, strategies as st

from covchain.chain import commute_distance, expected_hitting_times
from covchain.cover import cov_minus
from covchain.errors import PreconditionError
from covchain.growth import (
    GrowthInstance,
    check_growth_hypotheses,
    check_growth_instance,
    cov_minus_functional,
    cycle_identity_check,
    cycle_sums,
    diameter,
    growth_step_verify,
    literal_growth_size,
    longest_path_bound_independent_set,
    longest_path_length,
    one_way_sparsify,
)
from covchain.zoo import complete_graph, directed_cycle, kklv_tree, pair_star, path, tree_spec

from oracles import random_stochastic


def hd(chain):
    h = expected_hitting_times(chain)
    return h, commute_distance(h)


def test_hypothesis_clauses_are_named():
    d = np.array([[0, 1, 10], [1, 0, 10], [10, 10, 0]], dtype=float)
    with pytest.raises(PreconditionError, match="clause 1"):
        check_growth_hypotheses(d, [[0], [2]], 0.5, 16)
    with pytest.raises(PreconditionError, match="clause 2"):
        check_growth_hypotheses(d, [[0], [1]], 5, 16)
    with pytest.raises(PreconditionError, match="clause 3"):
        check_growth_hypotheses(d, [[0, 1], [2]], 10, 16)
    check_growth_hypotheses(d, [[0, 1], [2]], 9, 9)


def test_instance_validation():
    with pytest.raises(ValueError):
        GrowthInstance(16, 5, 0, 1.0, [[0, 1], [1, 2]])
    with pytest.raises(ValueError):
        GrowthInstance(1, 5, 0, 1.0, [[0]])


def test_growth_with_cover_functional_on_complete_graph():
    c = complete_graph(16)
    h, d = hd(c)
    F = cov_minus_functional(c)
    # commute distance 30; cov_- of m points is 15 H_{m-1}, which reaches a = 30 from m = 5
    assert check_growth_instance(F, d, GrowthInstance(16, 5, 0, 30.0, [[i] for i in range(16)])).passed
    assert check_growth_instance(F, d, GrowthInstance(16, 5, 0, 30.0, [[i] for i in range(5)])).passed
    assert not check_growth_instance(F, d, GrowthInstance(16, 5, 0, 30.0, [[i] for i in range(4)])).passed


def test_growth_negative_controls():
    c = complete_graph(16)
    _, d = hd(c)
    F = cov_minus_functional(c)
    # a single set can never gain a 2^n a increment
    assert not check_growth_instance(F, d, GrowthInstance(16, 5, 0, 30.0, [[3]])).passed
    # the diameter does not grow with the number of sets
    diam = lambda S: diameter(d, S)  # noqa: E731
    assert not check_growth_instance(diam, d, GrowthInstance(16, 5, 1, 30.0, [[i] for i in range(16)])).passed


def test_literal_growth_size():
    assert literal_growth_size(0) == 2 ** 32


def test_independent_set_examples():
    g = nx.DiGraph()
    g.add_nodes_from(range(5))
    assert longest_path_bound_independent_set(g) == set(range(5))
    order = nx.DiGraph([(i, j) for i in range(6) for j in range(i + 1, 6)])
    assert len(longest_path_bound_independent_set(order)) >= 1
    assert longest_path_length(order) == 6


@given(st.integers(1, 25), st.floats(0.0, 0.5), st.integers(0, 10 ** 6))
def test_independent_set_property(n, p, seed):
    g = nx.gnp_random_graph(n, p, seed=seed, directed=True)
    S = longest_path_bound_independent_set(g)
    assert not any(g.has_edge(u, v) for u in S for v in S)
    assert len(S) * longest_path_length(g) >= nx.number_strongly_connected_components(g)
    if nx.is_directed_acyclic_graph(g):
        assert len(S) * longest_path_length(g) >= n


def test_self_loop_rejected():
    with pytest.raises(ValueError):
        longest_path_bound_independent_set(nx.DiGraph([(0, 0)]))


@given(st.integers(3, 9), st.integers(0, 10 ** 6), st.data())
def test_cycle_identity_reversible(n, seed, data):
    c = random_stochastic(np.random.default_rng(seed), n, True)
    h = expected_hitting_times(c)
    cyc = data.draw(st.lists(st.integers(0, n - 1), min_size=2, max_size=n, unique=True))
    assert cycle_identity_check(c, h, cyc).passed


def test_two_cycle_sums_equal_commute():
    c = path(5)
    h, d = hd(c)
    assert cycle_sums(h, [1, 3]) == pytest.approx((d[1, 3], d[1, 3]))


def test_directed_cycle_gap():
    c = directed_cycle(5)
    h = expected_hitting_times(c)
    with pytest.raises(PreconditionError):
        cycle_identity_check(c, h, [0, 1, 2])
    rep = cycle_identity_check(c, h, [0, 1, 2], diagnostic=True)
    # forward 1 + 1 + 3, reverse 4 + 4 + 2
    assert rep.context["forward"] == pytest.approx(5.0) and rep.context["reverse"] == pytest.approx(10.0)
    assert not rep.passed and not rep.hard


def test_sparsify_complete_graph_keeps_everything():
    c = complete_graph(7)
    h, d = hd(c)
    assert one_way_sparsify(h, d, range(7), d[0, 1] / 2) == list(range(7))


def test_sparsify_star_drops_hub():
    # leaves reach the hub in one step, the hub needs many steps to reach a given leaf
    W = np.zeros((11, 11))
    W[0, 1:] = W[1:, 0] = 1.0
    from covchain.chain import MarkovChain

    c = MarkovChain.from_weights(W)
    h, d = hd(c)
    kept = one_way_sparsify(h, d, range(11), d[0, 1])
    assert kept == list(range(1, 11))


def test_sparsify_tree_leaves():
    tree, c = kklv_tree(3)
    h, d = hd(c)
    leaves = np.flatnonzero(tree.depth == 3).tolist()
    a = min(d[x, y] for x in leaves for y in leaves if x != y)
    kept = one_way_sparsify(h, d, leaves, a)
    assert 33 * len(kept) >= len(leaves)
    assert all(h[x, y] >= a / 4 for x in kept for y in kept if x != y)


def test_sparsify_preconditions():
    h, d = hd(path(20))
    with pytest.raises(PreconditionError, match="exceeds 16a"):
        one_way_sparsify(h, d, [0, 1, 19], d[0, 1])
    with pytest.raises(PreconditionError, match="< a"):
        one_way_sparsify(h, d, [0, 1, 19], d[0, 19] / 16)


def test_growth_step_path_singletons():
    c = path(6)
    h, d = hd(c)
    rep = growth_step_verify(c, [[0], [5]], d, d[0, 5], h)
    assert rep.passed and rep.name == "growth-step"
    assert rep.lhs == pytest.approx(d[0, 5] / 8 * math.log(2))


def test_growth_step_six_pairs():
    g = pair_star(6, inner=60)
    c = g.chain()
    h, d = hd(c)
    sets = [[2 * j + 1, 2 * j + 2] for j in range(6)]
    a = min(d[np.ix_(s, t)].min() for i, s in enumerate(sets) for t in sets[i + 1:])
    rep = growth_step_verify(c, sets, d, a, h)
    assert rep.passed and rep.context["kept"] >= 1
    assert rep.rhs == pytest.approx(cov_minus(c, [x for s in sets for x in s]))


def test_growth_step_degenerate_scale():
    c = path(6)
    h, d = hd(c)
    with pytest.raises(PreconditionError):
        growth_step_verify(c, [[0], [5]], d, 10 * d[0, 5], h)


def test_growth_step_needs_reversible():
    c = directed_cycle(4)
    h, d = hd(c)
    with pytest.raises(PreconditionError):
        growth_step_verify(c, [[0], [2]], d, 4.0, h)


def test_tree_spec_d4_structure_only():
    assert tree_spec(4).n == 43873
