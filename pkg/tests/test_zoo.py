from fractions import Fraction

import numpy as np
import pytest

from covchain.chain import commute_distance, expected_hitting_times, is_reversible, stationary_distribution
from covchain.errors import CapacityError
from covchain.zoo import (
    KINDS,
    adversarial_descent,
    kklv_tree,
    make_zoo_chain,
    pair_star,
    parse_params,
    random_chain,
    random_graph,
    shifted_prefix_nets,
    torus_2d,
    tree_commute_checks,
    tree_gamma_scaling,
    tree_spec,
    weighted_graph,
)


@pytest.mark.parametrize("D,nodes,E", [(1, 3, 2), (2, 13, 22), (3, 183, 702)])
def test_tree_sizes(D, nodes, E):
    t = tree_spec(D)
    assert t.n == nodes and t.total_weight == E
    # depth-i nodes have N_i + 1 children
    assert len(t.children[0]) == 2


def test_tree_d4_is_structure_only():
    assert tree_spec(4).n == 43873
    with pytest.raises(CapacityError):
        kklv_tree(4)
    with pytest.raises(CapacityError):
        tree_spec(5)


@pytest.mark.parametrize("D", [1, 2, 3])
def test_tree_edge_commute_closed_form(D):
    tree, chain = kklv_tree(D)
    d = commute_distance(expected_hitting_times(chain))
    E = tree.total_weight
    for v in range(1, tree.n):
        i = tree.depth[v] - 1
        # a tree edge of weight w has commute distance 2E / w
        assert d[tree.parent[v], v] == pytest.approx(2 * E * 2.0 ** (-i), rel=1e-9)
    assert all(r.passed for r in tree_commute_checks(tree, chain, pairs=200, d=d))


def test_tree_common_ancestor_and_paths():
    t = tree_spec(2)
    leaf_a, leaf_b = t.children[t.children[0][0]][:2]
    assert t.common_ancestor_depth(leaf_a, leaf_b) == 1
    assert sorted(t.path_edges(leaf_a, leaf_b)) == sorted([leaf_a, leaf_b])
    assert t.in_subtree(leaf_a, t.children[0][0])


def test_adversarial_descent_avoids_nets():
    t = tree_spec(3)
    nets = shifted_prefix_nets(t)
    leaf = adversarial_descent(t, nets)
    assert t.depth[leaf] == 3
    for i in range(3):
        assert leaf not in set(nets[i].tolist())


def test_tree_gamma_scaling_rows():
    rows, reps = tree_gamma_scaling((1, 2))
    assert [r["D"] for r in rows] == [1, 2]
    hard = [r for r in reps if r.hard]
    assert hard and all(r.passed for r in hard)
    for r in rows:
        assert r["gamma1_lower"] <= r["gamma1_upper"] + 1e-9


def test_exact_stationary_of_weighted_graph():
    g = pair_star(2, inner=3, hub=1)
    pi = g.exact_stationary()
    assert pi[0] == Fraction(2, 16) and sum(pi) == 1
    np.testing.assert_allclose(stationary_distribution(g.chain()), [float(p) for p in pi], atol=1e-14)


def test_generators():
    assert torus_2d(3, 4).n == 12
    assert is_reversible(random_graph(9, seed=1).chain())
    assert random_chain(7, seed=2).n == 7
    c = weighted_graph([(0, 1, 2), (1, 2, 1)])
    np.testing.assert_allclose(c.P[1], [2 / 3, 0, 1 / 3])
    with pytest.raises(ValueError):
        weighted_graph([(0, 0, 1)])


def test_make_zoo_chain_and_params():
    assert parse_params("n=4, eps=0.25,name=x") == {"n": 4, "eps": 0.25, "name": "x"}
    assert make_zoo_chain("complete_graph", n=5).n == 5
    assert make_zoo_chain("kklv_tree", D=2).n == 13
    with pytest.raises(ValueError, match="unknown chain kind"):
        make_zoo_chain("hypercube", n=3)
    with pytest.raises(ValueError, match="bad parameters"):
        make_zoo_chain("path", m=3)
    with pytest.raises(ValueError):
        parse_params("n4")
    assert {"complete_graph", "path", "cycle_srw", "directed_cycle", "torus_2d", "two_state",
            "weighted_graph"} <= set(KINDS)
