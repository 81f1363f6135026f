"""Generic-chaining functionals on finite metric spaces.

``gamma_alpha(M, d) = inf sup_x sum_n 2**(n/alpha) * diam(A_n(x))`` over
admissible sequences of partitions (``|A_n| <= N(n)``, each level refining
the previous one).  This module evaluates the functional for a given
sequence, builds greedy upper bounds, entropy (Dudley) sums, packing lower
bounds and, for at most six points, the exact value by enumeration.

Metrics are plain square numpy arrays; points are their row indices.
"""
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError, ValidationError
from .reports import BoundReport
from .zoo import N

EXACT_MAX_POINTS = 6
EXACT_RADIUS_MAX_POINTS = 12
EXACT_RADIUS_MAX_CENTERS = 4


@dataclass
class AdmissibleSequence:
    """Nested partitions; ``levels[n]`` is a list of blocks (tuples of point indices)."""

    levels: list

    def __post_init__(self):
        self.levels = [[tuple(sorted(int(p) for p in b)) for b in level] for level in self.levels]

    @classmethod
    def from_labels(cls, label_rows):
        levels = []
        for labels in label_rows:
            blocks = {}
            for p, lab in enumerate(labels):
                blocks.setdefault(int(lab), []).append(p)
            levels.append(sorted(blocks.values()))
        return cls(levels)

    def validate(self, npoints):
        """Raise :class:`ValidationError` naming the first violated level."""
        if not self.levels:
            raise ValidationError("sequence has no levels")
        everything = tuple(range(npoints))
        prev = None
        for n, level in enumerate(self.levels):
            pts = sorted(p for b in level for p in b)
            if tuple(pts) != everything or any(len(b) == 0 for b in level):
                raise ValidationError(f"level {n} is not a partition of the {npoints} points")
            if len(level) > N(n):
                raise ValidationError(f"level {n} has {len(level)} blocks, more than N({n}) = {N(n)}")
            if prev is not None:
                owner = _labels(prev, npoints)
                for b in level:
                    if len({owner[p] for p in b}) != 1:
                        raise ValidationError(f"level {n} does not refine level {n - 1}")
            prev = level
        return self

    def labels(self, n, npoints):
        return _labels(self.levels[n], npoints)

    def ends_in_singletons(self):
        return all(len(b) == 1 for b in self.levels[-1])


def _labels(level, npoints):
    lab = np.empty(npoints, dtype=np.int64)
    for i, b in enumerate(level):
        lab[list(b)] = i
    return lab


@dataclass
class NetSequence:
    """Point subsets ``nets[i]`` with ``len(nets[i]) <= N(i)``."""

    nets: list

    def __post_init__(self):
        self.nets = [np.asarray(sorted(set(int(p) for p in m)), dtype=np.int64) for m in self.nets]

    def validate(self, npoints):
        for i, m in enumerate(self.nets):
            if m.size == 0:
                raise ValidationError(f"net {i} is empty")
            if m.size > N(i):
                raise ValidationError(f"net {i} has {m.size} points, more than N({i}) = {N(i)}")
            if m.min() < 0 or m.max() >= npoints:
                raise ValidationError(f"net {i} has an out-of-range point")
        return self


@dataclass
class GammaEstimate:
    alpha: int
    value: float
    kind: str  # upper-greedy | dudley | lower-packing | exact-oracle
    witness: AdmissibleSequence = None
    terms: list = field(default_factory=list)


def _weight(n, alpha):
    return 2.0 ** (n / alpha)


def _cell_diameters(d, labels):
    """Per-point diameter of the cell containing it."""
    out = np.zeros(len(labels))
    for lab in np.unique(labels):
        idx = np.flatnonzero(labels == lab)
        if idx.size > 1:
            out[idx] = d[np.ix_(idx, idx)].max()
    return out


def level_diameters(d, seq):
    """``diam[n, x]`` = diameter of the level-n cell containing ``x``."""
    d = np.asarray(d, dtype=float)
    npts = d.shape[0]
    return np.array([_cell_diameters(d, seq.labels(n, npts)) for n in range(len(seq.levels))])


def functional_value(d, seq, alpha):
    """``sup_x sum_n 2**(n/alpha) diam(A_n(x))`` for the given sequence.

    A sequence whose last level still has a cell with positive diameter is
    implicitly continued with that level, so the series diverges and the
    result is ``inf``.
    """
    d = np.asarray(d, dtype=float)
    seq.validate(d.shape[0])
    diam = level_diameters(d, seq)
    if diam[-1].max() > 0:
        return math.inf
    w = np.array([_weight(n, alpha) for n in range(len(diam))])
    return float((w[:, None] * diam).sum(axis=0).max())


def net_functional_value(d, nets):
    """``sup_x sum_i 2**i d(x, M_i)``; infinite unless the last net is at distance 0 from every point."""
    d = np.asarray(d, dtype=float)
    if not isinstance(nets, NetSequence):
        nets = NetSequence(nets)
    nets.validate(d.shape[0])
    total = np.zeros(d.shape[0])
    for i, m in enumerate(nets.nets):
        dist = d[:, m].min(axis=1)
        total += 2.0 ** i * dist
        if dist.max() == 0:
            return float(total.max())
    return math.inf


# --- nets and covering radii -----------------------------------------------


def farthest_point_order(d):
    """Farthest-point traversal from point 0; ties go to the lowest index.

    Returns ``(order, radii)`` where ``radii[m]`` is the covering radius of
    the first ``m`` points of ``order`` (``radii[0] = inf``, and
    ``radii[npoints] = 0``).
    """
    d = np.asarray(d, dtype=float)
    npts = d.shape[0]
    order = [0]
    dist = d[0].copy()
    radii = [math.inf]
    for _ in range(1, npts):
        nxt = int(np.argmax(dist))
        radii.append(float(dist[nxt]))
        order.append(nxt)
        dist = np.minimum(dist, d[nxt])
    radii.append(0.0)
    return order, radii


def _exact_radius(d, m):
    npts = d.shape[0]
    best = math.inf
    for centers in itertools.combinations(range(npts), m):
        r = d[:, centers].min(axis=1).max()
        best = min(best, r)
    return float(best)


def covering_radius_bounds(d, n):
    """``(lower, upper)`` bounds on ``e_n``, the optimal radius with at most ``N(n)`` centers.

    Exact (``lower == upper``) when ``N(n)`` reaches the point count, or
    when there are at most 12 points and ``N(n) <= 4``.  Otherwise the
    farthest-point radius ``r`` is a 2-approximation: ``r / 2 <= e_n <= r``.
    """
    d = np.asarray(d, dtype=float)
    npts = d.shape[0]
    m = N(n)
    if m >= npts:
        return 0.0, 0.0
    if npts <= EXACT_RADIUS_MAX_POINTS and m <= EXACT_RADIUS_MAX_CENTERS:
        r = _exact_radius(d, m)
        return r, r
    _, radii = farthest_point_order(d)
    return radii[m] / 2.0, radii[m]


def covering_radius(d, n):
    """``e_n``: exact in the small cases, else the greedy (upper) 2-approximation."""
    return covering_radius_bounds(d, n)[1]


def _levels_until_covered(npts):
    n = 0
    while N(n) < npts:
        n += 1
    return n


def dudley_bound(d, alpha):
    """Entropy sum ``sum_n 2**(n/alpha) e_n`` using upper estimates of ``e_n``."""
    d = np.asarray(d, dtype=float)
    top = _levels_until_covered(d.shape[0])
    terms = [_weight(n, alpha) * covering_radius_bounds(d, n)[1] for n in range(top + 1)]
    return GammaEstimate(alpha, float(sum(terms)), "dudley", terms=terms)


def gamma_lower_packing(d, alpha):
    """``max_n 2**(n/alpha) e_n`` with certified lower estimates of ``e_n``.

    Any level-n partition has at most ``N(n)`` cells; one point per cell is
    a set of centers within the largest cell diameter of every point, so
    each term is a lower bound of the functional.
    """
    d = np.asarray(d, dtype=float)
    top = _levels_until_covered(d.shape[0])
    terms = [_weight(n, alpha) * covering_radius_bounds(d, n)[0] for n in range(top + 1)]
    return GammaEstimate(alpha, float(max(terms)), "lower-packing", terms=terms)


# --- greedy admissible sequences -------------------------------------------


def voronoi_labels(d, centers):
    """Nearest-center assignment; ties go to the earliest center in ``centers``."""
    sub = np.asarray(d, dtype=float)[:, list(centers)]
    return np.argmin(sub, axis=1)


def _refine(labels, other):
    """Common refinement of two labelings, relabelled 0.. in order of first point."""
    pairs = {}
    out = np.empty(len(labels), dtype=np.int64)
    for p, key in enumerate(zip(labels.tolist(), other.tolist())):
        out[p] = pairs.setdefault(key, len(pairs))
    return out


def _sequence(d, net_of, adaptive):
    npts = d.shape[0]
    rows = [np.zeros(npts, dtype=np.int64)]
    n = 0
    while len(np.unique(rows[-1])) < npts:
        n += 1
        cand = None
        if adaptive:
            cand = _refine(rows[-1], voronoi_labels(d, net_of(n)))
            if len(np.unique(cand)) > N(n):
                cand = None
        if cand is None:
            cand = _refine(rows[-1], voronoi_labels(d, net_of(n - 1)))
        rows.append(cand)
    return AdmissibleSequence.from_labels(rows)


def greedy_sequences(d):
    """The two greedy admissible sequences built from farthest-point nets.

    Net ``n`` is the first ``N(n)`` points of the farthest-point order.
    The *shifted* sequence refines level ``n - 1`` by the Voronoi cells of
    net ``n - 1``, so ``|A_n| <= N(n-1)**2 = N(n)``.  The *adaptive* one
    refines by net ``n`` whenever the result still fits the budget ``N(n)``
    and falls back to the shifted step otherwise.
    """
    d = np.asarray(d, dtype=float)
    order, _ = farthest_point_order(d)
    net_of = lambda n: order[: min(N(n), len(order))]  # noqa: E731
    return _sequence(d, net_of, adaptive=False), _sequence(d, net_of, adaptive=True)


def greedy_gamma_upper(d, alpha):
    """Upper bound from the better of the two greedy sequences (shifted wins ties)."""
    d = np.asarray(d, dtype=float)
    best = None
    for seq in greedy_sequences(d):
        v = functional_value(d, seq, alpha)
        if best is None or v < best[0]:
            best = (v, seq)
    return GammaEstimate(alpha, best[0], "upper-greedy", witness=best[1])


# --- exhaustive oracle ------------------------------------------------------


def set_partitions(items, max_blocks=None):
    """All partitions of ``items`` (list) into at most ``max_blocks`` blocks."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest, max_blocks):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]
        if max_blocks is None or len(part) < max_blocks:
            yield [[first]] + part


def _refinements(level, max_blocks):
    """All refinements of ``level`` with at most ``max_blocks`` blocks."""
    options = [list(set_partitions(list(b))) for b in level]
    for combo in itertools.product(*options):
        blocks = [blk for part in combo for blk in part]
        if len(blocks) <= max_blocks:
            yield blocks


def exact_gamma(d, alpha, max_points=EXACT_MAX_POINTS):
    """The exact functional by enumerating every admissible refinement chain.

    Once ``N(n)`` reaches the point count the level is taken to be all
    singletons, which is optimal because diameters are nonnegative.
    """
    d = np.asarray(d, dtype=float)
    npts = d.shape[0]
    if npts > max_points:
        raise CapacityError(f"exact gamma enumerates at most {max_points} points, got {npts}")
    if npts <= 1:
        return GammaEstimate(alpha, 0.0, "exact-oracle", witness=AdmissibleSequence([[tuple(range(npts))]]))
    top = _levels_until_covered(npts)
    single = [[p] for p in range(npts)]
    best = [math.inf, None]

    def walk(levels):
        n = len(levels)
        if n == top:
            seq = AdmissibleSequence(levels + [single])
            v = functional_value(d, seq, alpha)
            if v < best[0]:
                best[:] = [v, seq]
            return
        for nxt in _refinements(levels[-1], N(n)):
            walk(levels + [nxt])

    walk([[list(range(npts))]])
    return GammaEstimate(alpha, best[0], "exact-oracle", witness=best[1])


# --- comparisons ------------------------------------------------------------


def singleton_level(npoints):
    """Smallest ``k`` with ``N(k) >= npoints``."""
    return _levels_until_covered(npoints)


def loglog_comparison(d):
    """Compare ``gamma_1(d)`` with ``gamma_2(sqrt d)**2``.

    Hard checks: ``gamma_1 <= gamma_2(sqrt d)**2`` (lower estimate on the
    left, upper on the right, or exact on both sides for at most six
    points), and for at most six points ``gamma_2(sqrt d)**2 <= (k+1)
    gamma_1`` with ``k`` the singleton level.  Soft: the ratio
    ``gamma_2(sqrt d)**2 / (gamma_1 ln ln |M|)``.
    """
    d = np.asarray(d, dtype=float)
    npts = d.shape[0]
    if npts < 3:
        raise ValueError("log log comparison needs at least 3 points")
    sd = np.sqrt(d)
    lnln = math.log(math.log(npts))
    reports = []
    if npts <= EXACT_MAX_POINTS:
        g1 = exact_gamma(d, 1).value
        g2 = exact_gamma(sd, 2).value
        k = singleton_level(npts)
        reports.append(BoundReport("gamma1-vs-gamma2-squared", g1, g2 ** 2, g1 <= g2 ** 2 * (1 + 1e-12),
                                   {"points": npts, "kind": "exact"}))
        reports.append(BoundReport("gamma2-squared-vs-levels-gamma1", g2 ** 2, (k + 1) * g1,
                                   g2 ** 2 <= (k + 1) * g1 * (1 + 1e-12), {"points": npts, "k": k}))
        g1_lo, g2_up = g1, g2
    else:
        g1_lo = gamma_lower_packing(d, 1).value
        g2_up = greedy_gamma_upper(sd, 2).value
        reports.append(BoundReport("gamma1-vs-gamma2-squared", g1_lo, g2_up ** 2,
                                   g1_lo <= g2_up ** 2 * (1 + 1e-12),
                                   {"points": npts, "kind": "lower-vs-upper"}))
    ratio = g2_up ** 2 / (g1_lo * lnln) if g1_lo > 0 else math.inf
    reports.append(BoundReport("gamma2-squared-over-gamma1-loglog", ratio, math.inf, True,
                               {"points": npts, "lnln": lnln}, hard=False))
    return reports


def gamma_ordering_check(d, alpha, rtol=1e-12):
    """Order the estimators on a metric with at most six points.

    Hard: ``packing <= exact <= greedy``, ``packing <= dudley`` and
    ``exact <= diam + 2**(1 + 1/alpha) * dudley``.  The last one holds
    because refining level ``n-1`` by the Voronoi cells of an optimal
    ``N(n-1)``-net gives an admissible level ``n`` with cells of diameter
    at most ``2 e_{n-1}``.  Soft: the ratio ``exact / dudley``.
    """
    d = np.asarray(d, dtype=float)
    npts = d.shape[0]
    lo = gamma_lower_packing(d, alpha).value
    ex = exact_gamma(d, alpha).value
    up = greedy_gamma_upper(d, alpha).value
    du = dudley_bound(d, alpha).value
    diam = float(d.max()) if npts > 1 else 0.0
    ctx = {"points": npts, "alpha": alpha}
    slack = lambda v: v * (1 + rtol) + rtol  # noqa: E731
    dom = diam + 2.0 ** (1 + 1 / alpha) * du
    return [
        BoundReport("gamma-packing-vs-exact", lo, ex, lo <= slack(ex), ctx),
        BoundReport("gamma-exact-vs-greedy", ex, up, ex <= slack(up), ctx),
        BoundReport("gamma-packing-vs-dudley", lo, du, lo <= slack(du), ctx),
        BoundReport("gamma-exact-vs-dudley-sum", ex, dom, ex <= slack(dom), ctx),
        BoundReport("gamma-exact-over-dudley", ex / du if du > 0 else 1.0, math.inf, True, ctx, hard=False),
    ]
