"""Acceptance gate: one test per criterion, each recording a PASS/FAIL line.

The lines are printed in the pytest terminal summary (section
"acceptance criteria").  Monte Carlo checks use 10^5 trials and seed 0.
"""
import math
import time

import numpy as np
import pytest

from covchain.suite import (
    check_bdnp,
    check_certificate,
    check_cover_crossval,
    check_cycles,
    check_excursions,
    check_gamma_ordering,
    check_global_ratios,
    check_growth,
    check_hitting_exactness,
    check_key_estimate,
    check_kklv,
    check_matthews,
    check_monotonicity,
    check_return_identity,
    check_sparsification,
    check_tree,
    SuiteConfig,
    default_entries,
    run_verification_suite,
)

TRIALS = 100_000
SEED = 0


@pytest.fixture(scope="module")
def entries():
    return default_entries()


def hard_ok(reports):
    return all(r.passed for r in reports if r.hard)


def failures(reports):
    return [r.row() for r in reports if r.hard and not r.passed][:5]


def record(acceptance, k, ok, detail):
    acceptance[k] = (ok, detail)
    print(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


def by_name(reports, name):
    return [r for r in reports if r.name == name]


def test_c01_hitting_exactness(acceptance):
    t0 = time.perf_counter()
    reps = check_hitting_exactness(1e-9)
    dt = time.perf_counter() - t0
    ok = hard_ok(reps) and dt < 1.0
    record(acceptance, 1, ok, f"max errors {reps[0].lhs:.2e} / {reps[1].lhs:.2e}, {dt:.2f} s")
    assert ok, (failures(reps), dt)


def test_c02_return_identity(acceptance, entries):
    reps = check_return_identity(entries, 1e-9)
    chains = {r.context["chain"] for r in reps}
    ok = hard_ok(reps) and len(chains) == sum(e.n <= 200 for e in entries)
    record(acceptance, 2, ok, f"{len(chains)} chains, worst {max(r.lhs for r in reps):.2e}")
    assert ok, failures(reps)


def test_c03_cover_crossval(acceptance, entries):
    t0 = time.perf_counter()
    reps = check_cover_crossval(entries, TRIALS, SEED, 1e-9)
    dt = time.perf_counter() - t0
    mc = by_name(reps, "cover-exact-vs-mc")
    worst = max(r.lhs / r.rhs if r.rhs > 0 else 0.0 for r in mc)
    ok = hard_ok(reps) and len(by_name(reps, "cover-two-state")) == 3 and dt < 60
    record(acceptance, 3, ok, f"{len(mc)} chains, worst |exact-mc|/3sigma {worst:.2f}, {dt:.1f} s")
    assert ok, (failures(reps), dt)


def test_c04_matthews(acceptance, entries):
    reps = check_matthews(entries, 200, SEED)
    n = len(by_name(reps, "matthews-upper"))
    ok = hard_ok(reps) and n == 200 and len(by_name(reps, "matthews-max-hit")) > 0
    record(acceptance, 4, ok, f"{n} (chain, A) pairs, {len(reps)} reports, "
                              f"{sum(not r.passed for r in reps)} violations")
    assert ok, failures(reps)


def test_c05_monotonicity(acceptance, entries):
    reps = check_monotonicity(entries, 100, SEED)
    ok = hard_ok(reps) and len(reps) == 100
    record(acceptance, 5, ok, f"{len(reps)} nested pairs, {sum(not r.passed for r in reps)} violations")
    assert ok, failures(reps)


def test_c06_excursion_law(acceptance, entries):
    reps = check_excursions(entries, SEED, 1e-9)
    ok = hard_ok(reps) and len(reps) > 0
    record(acceptance, 6, ok, f"{len(reps)} (chain, x, y), worst error {max(r.lhs for r in reps):.2e}")
    assert ok, failures(reps)


def test_c07_kklv_and_key_estimate(acceptance, entries):
    kk = check_kklv(entries, TRIALS, SEED)
    key = check_key_estimate(entries, TRIALS, SEED)
    ok = hard_ok(kk) and hard_ok(key) and len(kk) >= 20 and len(key) >= 20
    record(acceptance, 7, ok, f"KKLV {len(kk)} settings, key estimate {len(key)} settings, "
                              f"{sum(not r.passed for r in kk + key)} violations")
    assert ok, failures(kk + key)


def test_c08_bdnp(acceptance, entries):
    reps = check_bdnp(entries, TRIALS, SEED)
    restart = [r for r in by_name(reps, "bdnp-restart") if not r.low_confidence]
    wald = by_name(reps, "return-time-wald")
    ok = hard_ok(reps) and len(restart) >= 20 and all(r.passed for r in wald)
    record(acceptance, 8, ok, f"{len(restart)} conclusive settings, {len(wald)} return-time checks")
    assert ok, failures(reps)


def test_c09_chaining_certificate(acceptance):
    reps = check_certificate(TRIALS, SEED)
    probs = by_name(reps, "chaining-cover-probability")
    ok = hard_ok(reps) and len(probs) == 3
    record(acceptance, 9, ok, "P(cover before k0 returns) = "
                              + ", ".join(f"{r.context['p_hat']:.3f}" for r in probs))
    assert ok, failures(reps)


def test_c10_gamma_ordering(acceptance, entries):
    reps = check_gamma_ordering(entries, 50, SEED)
    metrics = {r.context.get("metric") for r in reps} - {None}
    ok = hard_ok(reps) and len(metrics) >= 50
    exact = [r for r in reps if r.name.startswith("gamma-uniform5")]
    record(acceptance, 10, ok, f"{len(metrics)} metrics; uniform-5 errors "
                               + ", ".join(f"{r.lhs:.1e}" for r in exact))
    assert ok, failures(reps)


def test_c11_reversibility(acceptance, entries):
    reps = check_cycles(entries, 1000, SEED, 1e-9)
    ok = hard_ok(reps) and reps[0].context.get("cycles") == 1000
    gap = by_name(reps, "directed-cycle-identity-gap")[0].context
    record(acceptance, 11, ok, f"1000 cycles, worst gap/tol {reps[0].lhs:.2e}; directed cycle "
                               f"forward {gap['forward']:g} vs reverse {gap['reverse']:g}")
    assert ok, failures(reps)


def test_c12_sparsification(acceptance, entries):
    reps = check_sparsification(entries, 24, SEED)
    n = len(by_name(reps, "sparsify-size"))
    ok = hard_ok(reps) and n >= 20
    record(acceptance, 12, ok, f"{n} instances, {sum(not r.passed for r in reps)} failures")
    assert ok, failures(reps)


def test_c13_growth_step(acceptance):
    reps = check_growth(24, SEED)
    ok = hard_ok(reps) and len(reps) >= 20
    record(acceptance, 13, ok, f"{len(reps)} instances, min slack {min(r.slack for r in reps):.3g}")
    assert ok, failures(reps)


def test_c14_tree(acceptance):
    reps, rows = check_tree(SEED, 500)
    bracket = by_name(reps, "tree-gamma1-bracket")
    ok = hard_ok(reps) and len(rows) == 3 and bracket and math.isfinite(bracket[0].lhs)
    record(acceptance, 14, ok, f"D=1..3 certificates {[round(r['certificate']) for r in rows]}, "
                               f"measured constant {bracket[0].lhs:.3g}")
    assert ok, failures(reps)


def test_c15_global_ratios(acceptance, entries):
    reps = check_global_ratios(entries)
    soft = [r for r in reps if not r.hard]
    names = {r.name for r in soft}
    ok = hard_ok(reps) and all(math.isfinite(r.lhs) for r in soft) and names >= {
        "ratio-cov-over-gamma2-squared", "ratio-gamma1-lower-over-cov", "gamma2-squared-over-gamma1-loglog"}
    vals = np.array([r.lhs for r in soft if r.name == "gamma2-squared-over-gamma1-loglog"])
    record(acceptance, 15, ok, f"{len(soft)} finite ratios; loglog ratio in [{vals.min():.3g}, {vals.max():.3g}]")
    assert ok, failures(reps)


def test_full_suite_default_config(tmp_path):
    t0 = time.perf_counter()
    status = run_verification_suite(SuiteConfig(out_dir=str(tmp_path)))
    dt = time.perf_counter() - t0
    print(f"default suite: exit {status}, {dt:.1f} s")
    assert status == 0 and dt < 300
