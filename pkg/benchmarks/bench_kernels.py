"""Compare the compiled and numpy random-walk kernels.

    python benchmarks/bench_kernels.py [--trials 20000] [--repeat 3]

Both backends consume the same seeded streams, so each row also checks
that their outputs are identical.
"""
import argparse
import time

import numpy as np

from covchain import kernels
from covchain.zoo import complete_graph, cycle_srw, kklv_tree, path


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=20_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    cases = [("complete_graph(8)", complete_graph(8)), ("cycle_srw(12)", cycle_srw(12)),
             ("path(12)", path(12)), ("kklv_tree(2)", kklv_tree(2)[1])]
    states = kernels.trial_states(0, args.trials)
    print(f"{'kernel':<22}{'chain':<20}{'compiled s':>12}{'python s':>12}{'speedup':>10}  equal")
    for label, chain in cases:
        cum = kernels.cumulative_rows(chain.P)
        groups = [[x] for x in range(chain.n)]
        jobs = {
            "cover_times": lambda b: kernels.cover_times(cum, groups, 0, states, backend=b),
            "cover_by_return": lambda b: kernels.cover_by_return(cum, groups, 0, 5, states, True, backend=b)[1],
            "visits_before_return": lambda b: kernels.visits_before_return(cum, 0, chain.n - 1, 5, states,
                                                                          backend=b),
        }
        for name, job in jobs.items():
            tc, oc = best_of(lambda: job("compiled"), args.repeat)
            tp, op = best_of(lambda: job("python"), args.repeat)
            print(f"{name:<22}{label:<20}{tc:>12.4f}{tp:>12.4f}{tp / tc:>10.1f}  {np.array_equal(oc, op)}")


if __name__ == "__main__":
    main()
