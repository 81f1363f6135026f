import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.sparse.csgraph import shortest_path

from covchain.chaining import (
    AdmissibleSequence,
    NetSequence,
    covering_radius_bounds,
    dudley_bound,
    exact_gamma,
    functional_value,
    gamma_lower_packing,
    gamma_ordering_check,
    greedy_gamma_upper,
    greedy_sequences,
    loglog_comparison,
    net_functional_value,
    set_partitions,
    singleton_level,
)
from covchain.errors import CapacityError, ValidationError
from covchain.zoo import N


def random_metric(seed, npts):
    rng = np.random.default_rng(seed)
    W = np.triu(rng.uniform(1.0, 10.0, (npts, npts)), 1)
    return shortest_path(W + W.T, directed=False)


metrics = st.builds(random_metric, st.integers(0, 10 ** 6), st.integers(2, 6))


def test_cardinality_budget():
    assert [N(n) for n in range(4)] == [1, 4, 16, 256]
    assert singleton_level(4) == 1 and singleton_level(5) == 2 and singleton_level(17) == 3


@pytest.mark.parametrize("c", [1.0, 2.5])
def test_uniform_five_points(c):
    d = c * (1 - np.eye(5))
    # level 0: one block (diam c); level 1: four blocks, one a pair (weight 2^(1/alpha)); then singletons
    assert exact_gamma(d, 1).value == pytest.approx(3 * c, abs=1e-12)
    assert exact_gamma(d, 2).value == pytest.approx(c * (1 + math.sqrt(2)), abs=1e-12)
    assert greedy_gamma_upper(d, 1).value == pytest.approx(3 * c)
    assert gamma_lower_packing(d, 1).value == pytest.approx(2 * c)


def test_uniform_four_points_all_equal():
    d = 1 - np.eye(4)
    for f in (exact_gamma, greedy_gamma_upper, dudley_bound, gamma_lower_packing):
        assert f(d, 1).value == pytest.approx(1.0)


def test_collinear_points_exact_exceeds_dudley_sum():
    # the entropy sum has no constant: radius 1 with one centre, diameter 2
    d = np.array([[0, 1, 2], [1, 0, 1], [2, 1, 0]], dtype=float)
    assert exact_gamma(d, 1).value == pytest.approx(2.0)
    assert dudley_bound(d, 1).value == pytest.approx(1.0)
    assert all(r.passed for r in gamma_ordering_check(d, 1))


def test_set_partitions_bell_numbers():
    assert [sum(1 for _ in set_partitions(list(range(k)))) for k in range(1, 7)] == [1, 2, 5, 15, 52, 203]
    # Stirling numbers S(5,1)+S(5,2) = 1 + 15
    assert sum(1 for _ in set_partitions(list(range(5)), max_blocks=2)) == 16


def test_exact_oracle_capacity():
    with pytest.raises(CapacityError):
        exact_gamma(1 - np.eye(7), 1)


def test_admissible_validation_names_level():
    with pytest.raises(ValidationError, match="level 1 has 5 blocks"):
        AdmissibleSequence([[(0, 1, 2, 3, 4)], [(0,), (1,), (2,), (3,), (4,)]]).validate(5)
    with pytest.raises(ValidationError, match="level 2 does not refine"):
        AdmissibleSequence([[(0, 1, 2, 3)], [(0, 1), (2, 3)], [(0, 2), (1,), (3,)]]).validate(4)
    with pytest.raises(ValidationError, match="level 0 is not a partition"):
        AdmissibleSequence([[(0, 1)]]).validate(3)


def test_functional_requires_final_singletons():
    d = 1 - np.eye(3)
    assert math.isinf(functional_value(d, AdmissibleSequence([[(0, 1, 2)]]), 1))
    assert functional_value(d, AdmissibleSequence([[(0, 1, 2)], [(0,), (1,), (2,)]]), 1) == 1.0


def test_net_functional():
    d = np.array([[0, 1, 3], [1, 0, 2], [3, 2, 0]], dtype=float)
    nets = NetSequence([[1], [0, 1, 2]]).validate(3)
    # sup_x [d(x, {1}) + 2 d(x, M_1)] = 2
    assert net_functional_value(d, nets) == 2.0
    assert math.isinf(net_functional_value(d, NetSequence([[1], [0, 1]])))


@given(st.integers(0, 10 ** 6), st.integers(3, 9))
def test_covering_radius_bounds_bracket_brute_force(seed, npts):
    d = random_metric(seed, npts)
    for n in range(singleton_level(npts) + 1):
        m = min(N(n), npts)
        best = min(d[:, list(c)].min(axis=1).max() for c in itertools.combinations(range(npts), m))
        lo, up = covering_radius_bounds(d, n)
        assert lo - 1e-12 <= best <= up + 1e-12


@given(metrics, st.sampled_from([1, 2]))
def test_estimator_ordering(d, alpha):
    for rep in gamma_ordering_check(d, alpha):
        assert rep.passed, rep.row()


@given(metrics, st.sampled_from([1, 2]), st.floats(0.01, 100.0))
def test_scaling_equivariance(d, alpha, c):
    for f in (exact_gamma, greedy_gamma_upper, dudley_bound, gamma_lower_packing):
        assert f(c * d, alpha).value == pytest.approx(c * f(d, alpha).value, rel=1e-9)


@given(st.integers(0, 10 ** 6), st.integers(2, 30))
def test_greedy_sequences_are_admissible(seed, npts):
    d = random_metric(seed, npts)
    for seq in greedy_sequences(d):
        seq.validate(npts)
        assert seq.ends_in_singletons()
    assert gamma_lower_packing(d, 1).value <= greedy_gamma_upper(d, 1).value + 1e-9


@given(st.builds(random_metric, st.integers(0, 10 ** 6), st.integers(3, 6)))
def test_loglog_exact_reports(d):
    reps = loglog_comparison(d)
    assert [r.name for r in reps] == ["gamma1-vs-gamma2-squared", "gamma2-squared-vs-levels-gamma1",
                                      "gamma2-squared-over-gamma1-loglog"]
    assert all(r.passed for r in reps)
    assert math.isfinite(reps[-1].lhs)


def test_loglog_large_metric_uses_bounds():
    d = random_metric(3, 20)
    reps = loglog_comparison(d)
    assert reps[0].context["kind"] == "lower-vs-upper" and reps[0].passed
    with pytest.raises(ValueError):
        loglog_comparison(1 - np.eye(2))
