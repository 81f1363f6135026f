"""Growth-condition checks for set functionals, the reversible cycle
identity for hitting times, and the one-way sparsification of a
well-separated set into a set with large hitting times in both directions.
"""
from dataclasses import dataclass

import networkx as nx
import numpy as np

from .chain import TOL, is_reversible, scaled_tol, stationary_distribution
from .cover import cov_minus, matthews_refined_lower
from .errors import NumericalError, PreconditionError
from .reports import BoundReport


@dataclass
class GrowthInstance:
    """Scale ratio ``r``, level offset ``tau``, step ``n``, scale ``a`` and disjoint sets."""

    r: float
    tau: int
    n: int
    a: float
    sets: list

    def __post_init__(self):
        self.sets = [sorted(int(p) for p in s) for s in self.sets]
        if not self.sets or any(not s for s in self.sets):
            raise ValueError("growth instance needs m >= 1 nonempty sets")
        flat = [p for s in self.sets for p in s]
        if len(flat) != len(set(flat)):
            raise ValueError("sets must be pairwise disjoint")
        if self.r <= 1 or self.a <= 0:
            raise ValueError("need r > 1 and a > 0")

    @property
    def m(self):
        return len(self.sets)

    @property
    def union(self):
        return sorted(p for s in self.sets for p in s)


def diameter(d, S):
    S = list(S)
    return float(d[np.ix_(S, S)].max()) if len(S) > 1 else 0.0


def set_distance(d, S, T):
    """Smallest distance between a point of ``S`` and a point of ``T``."""
    return float(d[np.ix_(list(S), list(T))].min())


def check_growth_hypotheses(d, sets, a, r, rtol=1e-12):
    """Raise :class:`PreconditionError` naming the first failed clause.

    (1) diam(union) <= r a, (2) dist(H_i, H_j) >= a for i != j,
    (3) diam(H_i) <= a / r.
    """
    union = [p for s in sets for p in s]
    du = diameter(d, union)
    if du > r * a * (1 + rtol):
        raise PreconditionError(f"clause 1: diameter of the union {du:.6g} exceeds r*a = {r * a:.6g}")
    for i in range(len(sets)):
        for j in range(i + 1, len(sets)):
            dij = set_distance(d, sets[i], sets[j])
            if dij < a * (1 - rtol):
                raise PreconditionError(f"clause 2: sets {i} and {j} are at distance {dij:.6g} < a = {a:.6g}")
    for i, s in enumerate(sets):
        di = diameter(d, s)
        if di > a / r * (1 + rtol):
            raise PreconditionError(f"clause 3: set {i} has diameter {di:.6g} > a/r = {a / r:.6g}")


def check_growth_instance(F, d, inst, tol=1e-6):
    """``F(union) >= a 2**n + min_i F(H_i)`` once the three hypotheses are verified.

    ``F`` maps a list of points to a nonnegative number.  The number of
    sets ``m`` is whatever the instance holds.
    """
    check_growth_hypotheses(d, inst.sets, inst.a, inst.r)
    lhs = inst.a * 2 ** inst.n + min(F(s) for s in inst.sets)
    rhs = F(inst.union)
    return BoundReport("growth-condition", lhs, rhs, lhs <= rhs + tol,
                       {"m": inst.m, "n": inst.n, "a": inst.a, "r": inst.r, "tau": inst.tau})


# --- directed graphs -----------------------------------------------------------


def longest_path_bound_independent_set(g):
    """Independent set of size at least (#strongly connected components) / (longest path).

    Path length counts vertices.  Each component of the condensation gets
    the length of the longest path ending at it; components on the same
    layer have no edges between them, so one representative (lowest vertex)
    per component of the most populated layer is independent.  For an
    acyclic graph this gives at least ``|V| / m`` vertices.
    """
    if g.number_of_nodes() == 0:
        return set()
    if any(u == v for u, v in g.edges):
        raise ValueError("directed graph has a self-loop")
    cond = nx.condensation(g)
    layer = {}
    for c in nx.topological_sort(cond):
        preds = list(cond.predecessors(c))
        layer[c] = 1 + max((layer[p] for p in preds), default=0)
    groups = {}
    for c, lv in layer.items():
        groups.setdefault(lv, []).append(c)
    best = max(sorted(groups), key=lambda lv: len(groups[lv]))
    chosen = {min(cond.nodes[c]["members"]) for c in groups[best]}
    for u in chosen:
        for v in g.successors(u):
            if v in chosen:
                raise NumericalError(f"internal: edge ({u}, {v}) inside the independent set")
    return chosen


def longest_path_length(g):
    """Longest path (in vertices) of the condensation of ``g``."""
    if g.number_of_nodes() == 0:
        return 0
    return nx.dag_longest_path_length(nx.condensation(g)) + 1


# --- reversibility ---------------------------------------------------------------


def cycle_sums(h, cycle):
    cycle = list(cycle)
    fwd = sum(h[cycle[i], cycle[(i + 1) % len(cycle)]] for i in range(len(cycle)))
    rev = sum(h[cycle[(i + 1) % len(cycle)], cycle[i]] for i in range(len(cycle)))
    return float(fwd), float(rev)


def cycle_identity_check(chain, h, cycle, tol=TOL, diagnostic=False, pi=None):
    """Hitting times around a cycle sum to the same value in both directions.

    Requires a reversible chain unless ``diagnostic`` is set, in which case
    the gap is reported for any chain.
    """
    if len(cycle) < 2:
        raise ValueError("cycle needs at least two states")
    rev_ok = is_reversible(chain, pi if pi is not None else stationary_distribution(chain), 1e-12)
    if not rev_ok and not diagnostic:
        raise PreconditionError("cycle identity needs a reversible chain (use diagnostic mode to measure the gap)")
    fwd, rev = cycle_sums(h, cycle)
    gap = abs(fwd - rev)
    t = scaled_tol(tol, h)
    return BoundReport("cycle-identity", gap, t, gap <= t,
                       {"cycle": list(cycle), "forward": fwd, "reverse": rev, "reversible": rev_ok},
                       hard=rev_ok)


def one_way_graph(h, A, a):
    """Edge (x, y) when ``E_x T(y) <= a/4``."""
    g = nx.DiGraph()
    g.add_nodes_from(A)
    for x in A:
        for y in A:
            if x != y and h[x, y] <= a / 4:
                g.add_edge(x, y)
    return g


def one_way_sparsify(h, d, A, a, rtol=1e-12):
    """Subset ``A'`` of ``A`` with ``|A'| >= |A|/33`` and ``E_x T(y) > a/4`` for x != y in ``A'``.

    Hypotheses: ``diam(A) <= 16 a`` and ``d(x, y) >= a`` for distinct
    points.  Both postconditions are verified before returning.
    """
    A = [int(x) for x in A]
    if diameter(d, A) > 16 * a * (1 + rtol):
        raise PreconditionError(f"diameter {diameter(d, A):.6g} exceeds 16a = {16 * a:.6g}")
    for i, x in enumerate(A):
        for y in A[i + 1:]:
            if d[x, y] < a * (1 - rtol):
                raise PreconditionError(f"d({x}, {y}) = {d[x, y]:.6g} < a = {a:.6g}")
    g = one_way_graph(h, A, a)
    chosen = sorted(longest_path_bound_independent_set(g))
    if 33 * len(chosen) < len(A):
        raise NumericalError(f"internal: sparsified set has {len(chosen)} < {len(A)}/33 points")
    for x in chosen:
        for y in chosen:
            if x != y and h[x, y] < a / 4:
                raise NumericalError(f"internal: E_{x} T({y}) = {h[x, y]:.6g} < a/4")
    return chosen


def growth_step_verify(chain, sets, d, a, h, tol=1e-6):
    """The composed growth step with ratio 16 and the exact cover functional.

    Sparsify one representative per set, check that cross hitting times
    between the kept sets are at least ``a/8``, then verify
    ``cov_-(union of kept) >= (a/8) ln|I| + min cov_-(H_i)`` exactly.
    """
    sets = [sorted(int(p) for p in s) for s in sets]
    if not is_reversible(chain):
        raise PreconditionError("growth step needs a reversible chain")
    check_growth_hypotheses(d, sets, a, 16)
    reps = [s[0] for s in sets]
    if len(sets) > 1:
        keep_reps = one_way_sparsify(h, d, reps, a)
    else:
        keep_reps = reps
    I = [reps.index(x) for x in keep_reps]
    kept = [sets[i] for i in I]
    if len(kept) > 1:
        worst = min(h[x, y] for i in range(len(kept)) for j in range(len(kept)) if i != j
                    for x in kept[i] for y in kept[j])
        if worst < a / 8 * (1 - 1e-12):
            raise NumericalError(f"internal: cross hitting time {worst:.6g} < a/8")
    rep = matthews_refined_lower(chain, kept, a=a / 8, h=h, tol=tol)
    rep.name = "growth-step"
    rep.context.update({"m": len(sets), "kept": len(kept), "a": a, "scale": "a/8 ln|I|"})
    return rep


def cov_minus_functional(chain):
    """``S -> cov_-(S)`` as a set functional for :func:`check_growth_instance`."""
    return lambda S: cov_minus(chain, list(S))


def literal_growth_size(n, tau=5):
    """``N(n + tau)``: the number of sets the literal condition asks for (2**32 at n = 0)."""
    from .zoo import N

    return N(n + tau)


__all__ = [
    "GrowthInstance",
    "check_growth_hypotheses",
    "check_growth_instance",
    "cov_minus_functional",
    "cycle_identity_check",
    "cycle_sums",
    "diameter",
    "growth_step_verify",
    "literal_growth_size",
    "longest_path_bound_independent_set",
    "longest_path_length",
    "one_way_graph",
    "one_way_sparsify",
    "set_distance",
]
