"""Command-line entry point: ``covchain {analyze,verify,gamma,zoo,simulate}``.

Exit codes: 0 success, 1 a hard inequality failed, 2 usage or config error.
"""
import argparse
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .chain import (
    chain_to_dict,
    commute_distance,
    dump_chain,
    expected_hitting_times,
    load_chain,
    read_matrix_csv,
    return_time_identity_check,
    sqrt_metric,
    stationary_distribution,
)
from .chaining import exact_gamma
from .cover import (
    bdnp_restart_check,
    chaining_cover_certificate,
    exact_cover_expectation,
    excursion_visit_law,
    key_estimate_check,
    kklv_tail_check,
    matthews_sandwich,
    mc_cover_time,
    trajectory_stats,
)
from .errors import CovchainError
from .growth import cycle_identity_check, growth_step_verify
from .reports import BoundReport, fmt, summarize, to_csv
from .suite import SUITE_TRIALS, SuiteConfig, analyze, check_tree, emit_plot_data, gamma_estimates, run_verification_suite
from .zoo import make_zoo_chain, parse_params

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

VERIFY_TARGETS = ("suite", "matthews", "bdnp", "kklv", "key", "excursion", "certificate",
                  "growth", "cycle", "return", "tree")


def _int_list(text):
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _global_flags(parser, suppress):
    default = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    g = parser.add_argument_group("global options")
    g.add_argument("--seed", type=int, default=default(None), help="master RNG seed (default 0)")
    g.add_argument("--trials", type=int, default=default(None), help=f"Monte Carlo trials (default {SUITE_TRIALS})")
    g.add_argument("--tol", type=float, default=default(None), help="numerical tolerance (default 1e-9)")
    g.add_argument("--out", default=default(None), help="output directory (or file for zoo/gamma)")
    g.add_argument("--config", default=default(None), help="JSON config with seed/trials/tolerance/chains/out")


def build_parser():
    p = argparse.ArgumentParser(prog="covchain", description="Cover times, hitting times and chaining bounds.")
    p.add_argument("--version", action="version", version=f"covchain {__version__}")
    _global_flags(p, suppress=False)
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="stationary law, hitting/commute matrices, cover and gamma")
    a.add_argument("chain", help="chain JSON file")
    _global_flags(a, suppress=True)

    v = sub.add_parser("verify", help="run inequality checks")
    v.add_argument("target", choices=VERIFY_TARGETS)
    v.add_argument("--chain", help="chain JSON file (required for single-chain targets)")
    v.add_argument("--subset", type=_int_list, help="target set A, e.g. 0,1,2 (default: all states)")
    v.add_argument("--start", type=int, default=0, help="start state z (default 0)")
    v.add_argument("--x", type=int, default=0)
    v.add_argument("--y", type=int, default=1)
    v.add_argument("--k", type=int, default=10)
    v.add_argument("--l", type=int, default=1)
    v.add_argument("--eps", type=float, default=0.5)
    v.add_argument("--cycle", type=_int_list, help="states of the cycle for the cycle identity")
    v.add_argument("--diagnostic", action="store_true", help="cycle identity on a non-reversible chain")
    v.add_argument("--sets", help="JSON file with a list of disjoint sets (growth target)")
    v.add_argument("--scale", type=float, help="scale a (growth target; default: least cross distance)")
    _global_flags(v, suppress=True)

    g = sub.add_parser("gamma", help="gamma functional estimates on a metric")
    src = g.add_mutually_exclusive_group(required=True)
    src.add_argument("--metric", help="CSV distance matrix")
    src.add_argument("--chain", help="chain JSON file (uses its commute metric)")
    g.add_argument("--alpha", type=int, choices=(1, 2), default=1)
    g.add_argument("--sqrt", action="store_true", help="use the square root of the metric")
    g.add_argument("--method", choices=("greedy", "dudley", "packing", "exact"), default="greedy")
    _global_flags(g, suppress=True)

    z = sub.add_parser("zoo", help="write a standard chain as JSON")
    z.add_argument("--kind", required=True)
    z.add_argument("--params", default="", help="k=v,... parameters")
    _global_flags(z, suppress=True)

    s = sub.add_parser("simulate", help="Monte Carlo cover time (against the exact value when feasible)")
    s.add_argument("chain", help="chain JSON file")
    s.add_argument("--subset", type=_int_list)
    s.add_argument("--start", type=int, default=0)
    s.add_argument("--horizon", type=int, default=0, help="also report occupation of one trajectory")
    _global_flags(s, suppress=True)
    return p


def _settings(args):
    """Merge --config with explicit flags (flags win)."""
    cfg = {}
    if getattr(args, "config", None):
        cfg = SuiteConfig.from_json(args.config).__dict__
    seed = args.seed if args.seed is not None else cfg.get("seed", 0)
    trials = args.trials if args.trials is not None else cfg.get("trials", SUITE_TRIALS)
    tol = args.tol if args.tol is not None else cfg.get("tolerance", 1e-9)
    out = args.out if args.out is not None else cfg.get("out_dir")
    # validation lives in SuiteConfig
    SuiteConfig(seed=seed, trials=trials, tolerance=tol, chains=[])
    return seed, trials, tol, out, cfg.get("chains")


def _emit(text, out, default_name):
    if out is None:
        sys.stdout.write(text)
        return None
    path = os.path.join(out, default_name) if os.path.isdir(out) or out.endswith(os.sep) else out
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w") as fh:
        fh.write(text)
    return path


def _report_status(reports):
    return EXIT_FAIL if any(r.hard and not r.passed for r in reports) else EXIT_OK


def cmd_analyze(args, seed, trials, tol, out, _):
    chain = load_chain(args.chain)
    _emit(analyze(chain, trials, seed), out, "analysis.csv")
    return EXIT_OK


def _need_chain(args):
    if not args.chain:
        raise CovchainError(f"verify {args.target} needs --chain FILE")
    return load_chain(args.chain)


def cmd_verify(args, seed, trials, tol, out, chains):
    if args.target == "suite":
        kw = {"seed": seed, "trials": trials, "tolerance": tol, "out_dir": out or "covchain-out"}
        if chains is not None:
            kw["chains"] = chains
        cfg = SuiteConfig(**kw)
        t0 = time.perf_counter()
        status = run_verification_suite(cfg)
        with open(os.path.join(cfg.out_dir, "summary.json")) as fh:
            s = json.load(fh)
        print(f"{s['hard_passed']}/{s['hard']} hard checks passed, {s['soft']} soft reports, "
              f"{s['low_confidence']} low-confidence, {time.perf_counter() - t0:.1f} s -> {cfg.out_dir}")
        return status
    if args.target == "tree":
        reports, rows = check_tree(seed)
        if out:
            emit_plot_data([], out, rows)
        return _finish(reports, out)
    chain = _need_chain(args)
    A = args.subset if args.subset is not None else list(range(chain.n))
    t = args.target
    if t == "matthews":
        reports = matthews_sandwich(chain, A, tol=tol)
    elif t == "bdnp":
        reports = bdnp_restart_check(chain, A, args.start, args.k, trials, seed)
    elif t == "kklv":
        reports = [kklv_tail_check(chain, args.x, args.y, args.k, args.eps, trials, seed)]
    elif t == "key":
        reports = [key_estimate_check(chain, args.start, args.x, args.y, args.k, args.l, trials, seed)]
    elif t == "excursion":
        reports = excursion_visit_law(chain, args.x, args.y, 20, trials, seed, tol)
    elif t == "certificate":
        from .chaining import functional_value, greedy_sequences

        h = expected_hitting_times(chain)
        d = commute_distance(h)[np.ix_(A, A)]
        seq = min(greedy_sequences(np.sqrt(d)), key=lambda s: functional_value(np.sqrt(d), s, 2))
        z = args.start if args.start in A else A[0]
        reports = chaining_cover_certificate(chain, A, z, seq, trials, seed, h=h)
    elif t == "growth":
        if not args.sets:
            raise CovchainError("verify growth needs --sets FILE")
        sets = _load_sets(args.sets)
        h = expected_hitting_times(chain)
        d = commute_distance(h)
        a = args.scale
        if a is None:
            a = min(float(d[np.ix_(s, u)].min()) for i, s in enumerate(sets) for u in sets[i + 1:])
        reports = [growth_step_verify(chain, sets, d, a, h)]
    elif t == "cycle":
        cyc = args.cycle or list(range(chain.n))
        reports = [cycle_identity_check(chain, expected_hitting_times(chain), cyc, tol, args.diagnostic)]
    elif t == "return":
        reports = return_time_identity_check(chain, tol)
    else:  # pragma: no cover - argparse restricts choices
        raise CovchainError(f"unknown target {t}")
    for r in reports:
        if r.low_confidence:
            r.hard = False
    return _finish(reports, out)


def _finish(reports, out):
    text = to_csv(reports)
    if out:
        os.makedirs(out, exist_ok=True)
        with open(os.path.join(out, "reports.csv"), "w") as fh:
            fh.write(text)
        with open(os.path.join(out, "summary.json"), "w") as fh:
            json.dump(summarize(reports), fh, indent=2, sort_keys=True)
    else:
        sys.stdout.write(text)
    return _report_status(reports)


def _load_sets(path):
    try:
        with open(path) as fh:
            sets = json.load(fh)
    except json.JSONDecodeError as exc:
        raise CovchainError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(sets, list) or not all(isinstance(s, list) and s for s in sets):
        raise CovchainError(f"{path}: expected a JSON list of nonempty lists of states")
    return [[int(x) for x in s] for s in sets]


def cmd_gamma(args, seed, trials, tol, out, _):
    if args.metric:
        d = read_matrix_csv(args.metric)
        labels = [str(i) for i in range(d.shape[0])]
    else:
        chain = load_chain(args.chain)
        d = commute_distance(expected_hitting_times(chain))
        labels = list(chain.labels)
    if args.sqrt:
        d = sqrt_metric(d)
    if args.method == "exact" and d.shape[0] > 6:
        exact_gamma(d, args.alpha)  # raises the capacity error with the limit
    est = gamma_estimates(d, args.alpha, (args.method,))[0]
    text = f"estimate,alpha,points,value\n{est.kind},{args.alpha},{d.shape[0]},{fmt(est.value)}\n"
    path = _emit(text, out, "gamma.csv")
    if path and est.witness is not None:
        side = {"kind": est.kind, "alpha": args.alpha, "value": est.value,
                "levels": [[[labels[p] for p in block] for block in level] for level in est.witness.levels]}
        with open(os.path.splitext(path)[0] + ".witness.json", "w") as fh:
            json.dump(side, fh, indent=2)
    return EXIT_OK


def cmd_zoo(args, seed, trials, tol, out, _):
    chain = make_zoo_chain(args.kind, **parse_params(args.params))
    if out:
        path = os.path.join(out, f"{args.kind}.json") if os.path.isdir(out) else out
        dump_chain(chain, path)
    else:
        json.dump(chain_to_dict(chain), sys.stdout, indent=2)
        sys.stdout.write("\n")
    return EXIT_OK


def cmd_simulate(args, seed, trials, tol, out, _):
    chain = load_chain(args.chain)
    A = args.subset if args.subset is not None else list(range(chain.n))
    mc = mc_cover_time(chain, A, args.start, trials, seed)
    ctx = {"subset": A, "start": args.start, "mc": mc.value, "trials": trials, "seed": seed}
    low = trials < 30
    if len(A) <= 12:
        ex = exact_cover_expectation(chain, A, args.start).value
        gap = abs(ex - mc.value)
        reports = [BoundReport("cover-exact-vs-mc", gap, mc.ci_halfwidth, gap <= mc.ci_halfwidth,
                               dict(ctx, exact=ex), hard=not low, low_confidence=low)]
    else:
        reports = [BoundReport("cover-mc", mc.value, mc.ci_halfwidth, True, ctx, hard=False, low_confidence=low)]
    if args.horizon:
        st = trajectory_stats(chain, args.start, args.horizon, seed)
        pi = stationary_distribution(chain)
        err = float(np.abs(st.visit_counts / st.horizon - pi).max())
        reports.append(BoundReport("occupation-vs-stationary", err, 1.0, True,
                                   {"horizon": args.horizon}, hard=False))
    return _finish(reports, out)


COMMANDS = {"analyze": cmd_analyze, "verify": cmd_verify, "gamma": cmd_gamma, "zoo": cmd_zoo,
            "simulate": cmd_simulate}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        settings = _settings(args)
        return COMMANDS[args.command](args, *settings)
    except (CovchainError, ValueError, OSError) as exc:
        print(f"covchain: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
