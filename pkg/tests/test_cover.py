import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from covchain.chain import commute_distance, expected_hitting_times, stationary_distribution
from covchain.chaining import AdmissibleSequence
from covchain.cover import (
    GroupCoverTable,
    bdnp_restart_check,
    chaining_cover_certificate,
    chaining_schedule,
    cov_minus,
    cov_plus,
    exact_cover_expectation,
    exact_cover_starts,
    exact_max_hit,
    excursion_tail_exact,
    excursion_visit_law,
    harmonic_lower,
    key_estimate_bound,
    key_estimate_check,
    kklv_bound,
    kklv_tail_check,
    matthews_bounds,
    matthews_refined_lower,
    matthews_sandwich,
    max_hit_lower_check,
    mc_cover_time,
    monotonicity_check,
    trajectory_stats,
)
from covchain.errors import CapacityError, PreconditionError
from covchain.zoo import complete_graph, cycle_srw, directed_cycle, kklv_tree, path, two_state

from oracles import brute_cover, brute_group_cover, coupon_complete, random_stochastic


@pytest.mark.parametrize("n", range(2, 9))
def test_complete_graph_coupon_collector(n):
    v = exact_cover_expectation(complete_graph(n) if n > 2 else two_state(0.5), range(n), 0).value
    want = coupon_complete(n) if n > 2 else 2.0
    assert v == pytest.approx(want, abs=1e-9)


def test_complete_graph_4_is_5_5():
    assert exact_cover_expectation(complete_graph(4), range(4), 0).value == pytest.approx(5.5, abs=1e-12)


@pytest.mark.parametrize("N", [3, 5, 9])
def test_directed_cycle_cover_is_n_minus_1(N):
    vals = exact_cover_starts(directed_cycle(N), range(N))
    np.testing.assert_allclose(vals, N - 1, atol=1e-9)


def test_path_cover_from_end():
    # cover from an end of a path 0..n-1 is hitting the far end: (n-1)^2
    assert exact_cover_expectation(path(5), range(5), 0).value == pytest.approx(16.0, abs=1e-9)


@pytest.mark.parametrize("eps", [0.1, 0.3, 0.5])
def test_two_state_cov_minus(eps):
    assert cov_minus(two_state(eps), [0, 1]) == pytest.approx(min(1 / eps, 1 / (1 - eps)), abs=1e-9)
    assert cov_plus(two_state(eps), [0, 1]) == pytest.approx(max(1 / eps, 1 / (1 - eps)), abs=1e-9)


@given(st.integers(2, 6), st.booleans(), st.integers(0, 10_000), st.data())
def test_dp_matches_joint_system(n, rev, seed, data):
    chain = random_stochastic(np.random.default_rng(seed), n, rev)
    A = data.draw(st.lists(st.integers(0, n - 1), min_size=1, max_size=min(n, 5), unique=True))
    start = data.draw(st.integers(0, n - 1))
    got = exact_cover_expectation(chain, A, start).value
    assert got == pytest.approx(brute_cover(chain.P, A, start), rel=1e-9, abs=1e-9)


def test_group_table_max_hit_of_singletons_is_cover():
    c = cycle_srw(6)
    assert exact_max_hit(c, [[1], [3], [5]], 0) == pytest.approx(
        exact_cover_expectation(c, [1, 3, 5], 0).value, rel=1e-12)


@given(st.integers(3, 7), st.integers(0, 10_000), st.data())
def test_group_table_matches_joint_system(n, seed, data):
    chain = random_stochastic(np.random.default_rng(seed), n, seed % 2 == 0)
    perm = data.draw(st.permutations(range(n)))
    cuts = sorted(data.draw(st.lists(st.integers(1, n - 1), min_size=1, max_size=3, unique=True)))
    groups = [list(perm[i:j]) for i, j in zip([0] + cuts, cuts + [n])]
    start = data.draw(st.integers(0, n - 1))
    assert exact_max_hit(chain, groups, start) == pytest.approx(
        brute_group_cover(chain.P, groups, start), rel=1e-9, abs=1e-9)


def test_capacity_limit():
    with pytest.raises(CapacityError):
        GroupCoverTable(complete_graph(25), [[i] for i in range(25)], max_groups=20)


def test_mc_within_ci_and_deterministic():
    c = complete_graph(4)
    est = mc_cover_time(c, range(4), 0, 20_000, 3)
    assert est.contains(5.5)
    again = mc_cover_time(c, range(4), 0, 20_000, 3)
    assert est.value == again.value
    assert mc_cover_time(c, range(4), 0, 20_000, 4).value != est.value


def test_mc_single_trial_has_infinite_ci():
    est = mc_cover_time(cycle_srw(5), range(5), 0, 1, 0)
    assert math.isinf(est.ci_halfwidth)
    with pytest.raises(ValueError):
        mc_cover_time(cycle_srw(5), range(5), 0, 0, 0)


def test_trajectory_occupation_tends_to_pi():
    c = path(4)
    s = trajectory_stats(c, 0, 200_000, 2)
    np.testing.assert_allclose(s.visit_counts / s.horizon, stationary_distribution(c), atol=0.01)
    # mean gap between returns to 0 estimates 1/pi(0) = 6
    assert np.diff(np.concatenate([[0], s.return_times])).mean() == pytest.approx(6.0, rel=0.05)


# --- Matthews family ---------------------------------------------------------------


def test_matthews_bounds_complete_graph():
    h = expected_hitting_times(complete_graph(5))
    lo, up = matthews_bounds(h, range(5))
    H = sum(1 / j for j in range(1, 5))
    assert lo == pytest.approx(4 * math.log(5)) and up == pytest.approx(4 * (1 + math.log(5)))
    assert matthews_bounds(h, [2]) == (0.0, 0.0)
    assert harmonic_lower(h, range(5)) == pytest.approx(4 * H)


@given(st.integers(2, 8), st.booleans(), st.integers(0, 10_000), st.data())
def test_matthews_sandwich_property(n, rev, seed, data):
    chain = random_stochastic(np.random.default_rng(seed), n, rev)
    A = data.draw(st.lists(st.integers(0, n - 1), min_size=2, max_size=n, unique=True))
    assert all(r.passed for r in matthews_sandwich(chain, A))


@given(st.integers(3, 8), st.integers(0, 10_000), st.data())
def test_monotonicity_property(n, seed, data):
    chain = random_stochastic(np.random.default_rng(seed), n, seed % 2 == 0)
    B = data.draw(st.lists(st.integers(0, n - 1), min_size=1, max_size=n, unique=True))
    A = data.draw(st.lists(st.sampled_from(B), min_size=1, max_size=len(B), unique=True))
    assert monotonicity_check(chain, A, B).passed


def test_monotonicity_requires_subset():
    with pytest.raises(ValueError):
        monotonicity_check(complete_graph(4), [0, 3], [0, 1])


def test_refined_lower_and_precondition():
    c = cycle_srw(8)
    sets = [[0, 1], [4, 5]]
    rep = matthews_refined_lower(c, sets)
    assert rep.passed
    h = expected_hitting_times(c)
    with pytest.raises(PreconditionError, match=r"E_\d+ T\(\d+\)"):
        matthews_refined_lower(c, sets, a=h[1, 4] + 1, h=h)


def test_max_hit_lower_check():
    reps = max_hit_lower_check(complete_graph(6), [[0], [2], [4]], 1, trials=5000, seed=1)
    assert [r.name for r in reps] == ["matthews-max-hit", "matthews-max-hit-mc"]
    assert all(r.passed for r in reps)


# --- excursions and deviation bounds -------------------------------------------------


def test_excursion_law_complete_graph_3():
    tail = excursion_tail_exact(complete_graph(3), 0, 1, 20)
    assert tail[0] == 1.0
    r = np.arange(21)
    np.testing.assert_allclose(tail[1:], 0.75 * 0.25 ** r, atol=1e-15)
    rep = excursion_visit_law(complete_graph(3), 0, 1, 20, trials=20_000, seed=0)
    assert rep[0].passed and rep[0].context["p_xy"] == pytest.approx(0.75)
    assert not rep[1].hard


@given(st.integers(3, 8), st.booleans(), st.integers(0, 10_000))
def test_excursion_law_random(n, rev, seed):
    chain = random_stochastic(np.random.default_rng(seed), n, rev)
    assert excursion_visit_law(chain, 0, n - 1, 20)[0].passed


def test_kklv_bound_value():
    pi = np.array([0.25, 0.75])
    d = np.array([[0, 4.0], [4.0, 0]])
    assert kklv_bound(pi, d, 0, 1, 8, 0.5) == pytest.approx(math.exp(-0.25 * 8 / 4))


def test_kklv_check_passes():
    rep = kklv_tail_check(complete_graph(6), 0, 5, 100, 0.5, 20_000, 0)
    assert rep.passed and rep.context["threshold"] == pytest.approx(50.0)


def test_key_estimate_bound_and_precondition():
    pi = np.array([0.5, 0.5])
    d = np.array([[0, 4.0], [4.0, 0]])
    # a = 18, b = 6: exp(-144 / 288)
    assert key_estimate_bound(pi, d, 0, 1, 10, 4) == pytest.approx(math.exp(-0.5))
    with pytest.raises(PreconditionError):
        key_estimate_bound(pi, d, 0, 1, 4, 10)


def test_key_estimate_check_passes():
    assert key_estimate_check(complete_graph(5), 0, 0, 4, 200, 20, 20_000, 0).passed


def test_bdnp_restart_and_wald():
    c = complete_graph(4)
    rest, wald = bdnp_restart_check(c, [0, 1, 2, 3], 0, 40, 20_000, 0)
    assert rest.passed and wald.passed
    assert wald.context["expected"] == pytest.approx(160.0)


def test_bdnp_impossible_cover_is_inconclusive():
    # on the 3-node star no excursion from the centre visits both leaves
    rest, _ = bdnp_restart_check(kklv_tree(1)[1], [0, 1, 2], 0, 1, 1000, 0)
    assert rest.low_confidence and rest.passed and math.isinf(rest.rhs)


# --- chaining certificate -------------------------------------------------------------


def test_chaining_schedule_two_points():
    d = np.array([[0, 4.0], [4.0, 0]])
    seq = AdmissibleSequence([[(0, 1)], [(0,), (1,)]])
    r = chaining_schedule(d, seq)
    np.testing.assert_allclose(r, [[2.0, 2.0], [0.0, 0.0]])


def test_chaining_certificate_complete_graph():
    c = complete_graph(4)
    d = commute_distance(expected_hitting_times(c))
    seq = AdmissibleSequence([[(0, 1, 2, 3)], [(0,), (1,), (2,), (3,)]])
    reps = chaining_cover_certificate(c, [0, 1, 2, 3], 0, seq, 10_000, 0)
    assert [r.name for r in reps] == ["chaining-cover-probability", "chaining-cover-restart",
                                      "chaining-cover-constant"]
    assert all(r.passed for r in reps)
    r0 = math.sqrt(d[0, 1])
    assert reps[0].context["k0"] == math.floor(34 * 0.25 * r0 ** 2) + 1
