"""Cover times: exact expectations by dynamic programming over visited
subsets, Monte Carlo estimates, and checks of the classical hitting-time
bounds (Matthews, restart, excursion law, deviation tail, chaining
certificate).

Time 0 counts as a visit: a walk started inside the target set has
already covered its starting point.
"""
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import kernels
from .chain import (
    commute_distance,
    escape_probability,
    expected_hitting_times,
    stationary_distribution,
)
from .errors import CapacityError, PreconditionError
from .reports import BoundReport

#: largest target set handled by the exact dynamic program
MAX_EXACT_SUBSET = 20
#: Monte Carlo defaults used when a set is too large for the exact solver
DEFAULT_TRIALS = 10_000
DEFAULT_SEED = 0


@dataclass
class CoverTimeEstimate:
    value: float
    method: str  # "exact-DP" or "monte-carlo"
    ci_halfwidth: float = 0.0
    trials: int = 0
    seed: int = None

    def __post_init__(self):
        if self.value < 0 or self.ci_halfwidth < 0:
            raise ValueError("cover-time estimate must be nonnegative")
        if self.method == "exact-DP" and self.trials:
            raise ValueError("exact estimates carry no trials")

    def contains(self, x, slack=0.0):
        return abs(x - self.value) <= self.ci_halfwidth + slack


@dataclass
class TrajectoryStats:
    """Visit counts over ``[0, horizon)`` and the return times of ``base``."""

    visit_counts: np.ndarray
    return_times: np.ndarray
    horizon: int


def _as_groups(A):
    return [[int(a)] for a in A]


def _check_subset(chain, A):
    A = [int(a) for a in A]
    if len(set(A)) != len(A):
        raise ValueError("target set has repeated states")
    for a in A:
        if not 0 <= a < chain.n:
            raise ValueError(f"state {a} out of range")
    return A


class GroupCoverTable:
    """Expected time to visit every group, for every (state, visited-groups mask).

    ``table[mask, v]`` is the expected remaining time from ``v`` when the
    groups in ``mask`` have been visited (NaN when ``v``'s own group is not
    in ``mask``).  Masks are processed in decreasing population order; each
    mask is one dense solve over the states that keep the mask unchanged.
    """

    def __init__(self, chain, groups, max_groups=MAX_EXACT_SUBSET):
        k = len(groups)
        if k > max_groups:
            raise CapacityError(
                f"exact cover needs at most {max_groups} targets, got {k}; use the Monte Carlo estimator"
            )
        n = chain.n
        self.k = k
        self.group = kernels.group_vector(n, groups)
        P = chain.P
        full = (1 << k) - 1
        table = np.full((1 << k, n), np.nan)
        table[full, :] = 0.0
        bit = np.where(self.group >= 0, 1 << np.maximum(self.group, 0), 0)
        masks = sorted(range(full), key=lambda m: -bin(m).count("1"))
        for mask in masks:
            inside = ((bit & mask) == bit)  # states whose group (if any) is already visited
            S = np.flatnonzero(inside)
            T = np.flatnonzero(~inside)
            rhs = np.ones(S.size)
            if T.size:
                nxt = table[mask | bit[T], T]
                rhs += P[np.ix_(S, T)] @ nxt
            A = np.eye(S.size) - P[np.ix_(S, S)]
            table[mask, S] = scipy.linalg.solve(A, rhs, check_finite=False)
        self.table = table
        self.bit = bit

    def expected(self, start):
        return float(self.table[self.bit[start], start])

    def all_starts(self):
        return self.table[self.bit, np.arange(len(self.bit))]


def exact_cover_expectation(chain, A, start, max_subset=MAX_EXACT_SUBSET):
    """``E_start T_cov(A)`` by the exact subset dynamic program."""
    A = _check_subset(chain, A)
    value = GroupCoverTable(chain, _as_groups(A), max_subset).expected(start)
    return CoverTimeEstimate(max(value, 0.0), "exact-DP")


def exact_cover_starts(chain, A, max_subset=MAX_EXACT_SUBSET):
    """``E_x T_cov(A)`` for every state ``x`` (array of length n)."""
    A = _check_subset(chain, A)
    return GroupCoverTable(chain, _as_groups(A), max_subset).all_starts()


def exact_max_hit(chain, sets, start, max_groups=MAX_EXACT_SUBSET):
    """``E_start max_i T(H_i)``: expected time until every set has been hit."""
    return GroupCoverTable(chain, [list(h) for h in sets], max_groups).expected(start)


def _ci(samples, trials):
    return 3.0 * float(np.std(samples, ddof=1)) / math.sqrt(trials) if trials > 1 else math.inf


def mc_cover_time(chain, A, start, trials, seed, backend=None):
    """Mean of ``trials`` simulated cover times; deterministic in (seed, trials)."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    A = _check_subset(chain, A)
    cum = kernels.cumulative_rows(chain.P)
    times = kernels.cover_times(cum, _as_groups(A), start, kernels.trial_states(seed, trials), backend)
    return CoverTimeEstimate(float(times.mean()), "monte-carlo", _ci(times, trials), trials, seed)


def _starts_values(chain, A, trials, seed, max_subset):
    A = _check_subset(chain, A)
    if not A:
        raise ValueError("target set must be nonempty")
    if len(A) <= max_subset:
        vals = exact_cover_starts(chain, A, max_subset)[A]
        return np.maximum(vals, 0.0)
    return np.array([mc_cover_time(chain, A, x, trials, seed).value for x in A])


def cov_minus(chain, A, trials=DEFAULT_TRIALS, seed=DEFAULT_SEED, max_subset=MAX_EXACT_SUBSET):
    """``min_{x in A} E_x T_cov(A)``."""
    return float(_starts_values(chain, A, trials, seed, max_subset).min())


def cov_plus(chain, A, trials=DEFAULT_TRIALS, seed=DEFAULT_SEED, max_subset=MAX_EXACT_SUBSET):
    """``max_{x in A} E_x T_cov(A)``."""
    return float(_starts_values(chain, A, trials, seed, max_subset).max())


def cov(chain, A, **kw):
    """The cover time of ``A``: worst start inside ``A`` (same as :func:`cov_plus`)."""
    return cov_plus(chain, A, **kw)


def trajectory_stats(chain, start, horizon, seed, base=None, backend=None):
    path = kernels.trajectory(kernels.cumulative_rows(chain.P), start, horizon, seed, backend)
    base = start if base is None else base
    counts = np.bincount(path, minlength=chain.n)
    returns = np.flatnonzero(path[1:] == base) + 1
    return TrajectoryStats(counts, returns, int(horizon))


# --- Matthews-type bounds -----------------------------------------------------


def matthews_bounds(h, A):
    """``(lower, upper)`` with lower = ln|A| min_{x!=y} h[x, y] and upper = (1 + ln|A|) max h[x, y].

    A single point has no pair; both bounds are then 0.
    """
    A = list(A)
    if len(A) < 2:
        return 0.0, 0.0
    sub = np.asarray(h)[np.ix_(A, A)]
    off = ~np.eye(len(A), dtype=bool)
    m = math.log(len(A))
    return m * float(sub[off].min()), (1 + m) * float(sub[off].max())


def harmonic_lower(h, A):
    """``a * sum_{k=1}^{|A|-1} 1/k`` with ``a`` the least hitting time between distinct points of A."""
    A = list(A)
    if len(A) < 2:
        return 0.0
    sub = np.asarray(h)[np.ix_(A, A)]
    a = float(sub[~np.eye(len(A), dtype=bool)].min())
    return a * sum(1.0 / k for k in range(1, len(A)))


def matthews_sandwich(chain, A, h=None, tol=1e-9):
    """Reports ``lower <= cov_-(A)``, ``cov_+(A) <= upper`` and the harmonic lower form."""
    if h is None:
        h = expected_hitting_times(chain)
    vals = exact_cover_starts(chain, A)[list(A)]
    cmin, cmax = float(vals.min()), float(vals.max())
    lo, up = matthews_bounds(h, A)
    harm = harmonic_lower(h, A)
    ctx = {"subset": list(A), "cov_minus": cmin, "cov_plus": cmax}
    t = tol * max(1.0, cmax)
    return [
        BoundReport("matthews-lower", lo, cmin, lo <= cmin + t, ctx),
        BoundReport("matthews-upper", cmax, up, cmax <= up + t, ctx),
        BoundReport("matthews-harmonic", harm, cmin, harm <= cmin + t, ctx),
    ]


def _cross_separation(h, sets):
    """Least ``h[x, y]`` over x, y in different sets, and the pair attaining it."""
    best, pair = math.inf, None
    for i, Hi in enumerate(sets):
        for j, Hj in enumerate(sets):
            if i == j:
                continue
            sub = h[np.ix_(list(Hi), list(Hj))]
            r, c = np.unravel_index(np.argmin(sub), sub.shape)
            if sub[r, c] < best:
                best, pair = float(sub[r, c]), (list(Hi)[r], list(Hj)[c])
    return best, pair


def matthews_refined_lower(chain, sets, a=None, h=None, tol=1e-6):
    """``cov_-(union) >= a ln m + min_i cov_-(H_i)`` for sets separated by hitting time ``a``.

    ``a`` defaults to the smallest cross hitting time.  A supplied ``a``
    larger than some ``E_x T(y)`` with x, y in different sets is a
    precondition error naming the pair.
    """
    sets = [list(s) for s in sets]
    if not sets or any(not s for s in sets):
        raise ValueError("need at least one nonempty set")
    flat = [x for s in sets for x in s]
    if len(set(flat)) != len(flat):
        raise ValueError("sets must be disjoint")
    if h is None:
        h = expected_hitting_times(chain)
    m = len(sets)
    sep, pair = _cross_separation(h, sets) if m > 1 else (math.inf, None)
    if a is None:
        a = sep if m > 1 else 0.0
    elif m > 1 and sep < a * (1 - 1e-12):
        raise PreconditionError(f"E_{pair[0]} T({pair[1]}) = {sep:.6g} < a = {a:.6g}")
    union = cov_minus(chain, flat)
    parts = [cov_minus(chain, s) for s in sets]
    lhs = a * math.log(m) + min(parts)
    return BoundReport("matthews-refined", lhs, union, lhs <= union + tol,
                       {"m": m, "a": a, "min_part": min(parts)})


def max_hit_lower_check(chain, sets, start, a=None, h=None, trials=0, seed=DEFAULT_SEED, tol=1e-9):
    """``E_x max_i T(H_i) >= a ln m`` for separated sets, exactly and (optionally) by simulation."""
    sets = [list(s) for s in sets]
    if h is None:
        h = expected_hitting_times(chain)
    sep, pair = _cross_separation(h, sets)
    if a is None:
        a = sep
    elif sep < a * (1 - 1e-12):
        raise PreconditionError(f"E_{pair[0]} T({pair[1]}) = {sep:.6g} < a = {a:.6g}")
    lhs = a * math.log(len(sets))
    exact = exact_max_hit(chain, sets, start)
    out = [BoundReport("matthews-max-hit", lhs, exact, lhs <= exact + tol * max(1, exact),
                       {"m": len(sets), "a": a, "start": start})]
    if trials:
        cum = kernels.cumulative_rows(chain.P)
        t = kernels.cover_times(cum, sets, start, kernels.trial_states(seed, trials))
        ci = _ci(t, trials)
        out.append(BoundReport("matthews-max-hit-mc", lhs, t.mean() + ci, lhs <= t.mean() + ci,
                               {"m": len(sets), "a": a, "mean": t.mean(), "ci": ci, "exact": exact,
                                "trials": trials, "seed": seed}))
    return out


def monotonicity_check(chain, A, B, tol=1e-9):
    """``cov_-(A) <= cov_-(B)`` for ``A`` a subset of ``B``."""
    if not set(A) <= set(B):
        raise ValueError("A must be a subset of B")
    ca, cb = cov_minus(chain, A), cov_minus(chain, B)
    return BoundReport("cov-minus-monotone", ca, cb, ca <= cb + tol * max(1, cb),
                       {"A": list(A), "B": list(B)})


# --- restart bound, excursions, deviation tails --------------------------------


def _sigma(p, trials):
    return math.sqrt(max(p * (1 - p), 0.0) / trials)


def bdnp_restart_check(chain, A, z, k, trials, seed, pi=None):
    """``E_z T_cov(A) <= k / (pi(z) P_z(T_cov(A) <= T^k(z)))`` and ``E_z T^k(z) = k / pi(z)``.

    The probability is estimated by simulation; the bound is tested at the
    upper end ``p + 3 sigma`` of its confidence interval.  A zero estimate
    makes the bound infinite and the report inconclusive (passed, low
    confidence).  Returns ``[restart report, return-time report]``.
    """
    A = _check_subset(chain, A)
    if z not in A:
        raise ValueError("z must belong to A")
    if k < 1:
        raise ValueError("k must be >= 1")
    if pi is None:
        pi = stationary_distribution(chain)
    lhs = exact_cover_expectation(chain, A, z).value
    cum = kernels.cumulative_rows(chain.P)
    covered, tk = kernels.cover_by_return(cum, _as_groups(A), z, k, kernels.trial_states(seed, trials), True)
    p = float(covered.mean())
    sig = _sigma(p, trials)
    ctx = {"subset": A, "z": z, "k": k, "p_hat": p, "sigma": sig, "trials": trials, "seed": seed}
    if p == 0:
        rep = BoundReport("bdnp-restart", lhs, math.inf, True, ctx, low_confidence=True)
    else:
        rhs = k / (pi[z] * min(1.0, p + 3 * sig))
        rep = BoundReport("bdnp-restart", lhs, rhs, lhs <= rhs, dict(ctx, rhs_at_p_hat=k / (pi[z] * p)),
                          low_confidence=trials < 30)
    want = k / pi[z]
    mean = float(tk.mean())
    ci = _ci(tk, trials)
    wald = BoundReport("return-time-wald", abs(mean - want), ci, abs(mean - want) <= ci,
                       {"z": z, "k": k, "mean": mean, "expected": want, "trials": trials},
                       low_confidence=trials < 30)
    return [rep, wald]


def excursion_tail_exact(chain, x, y, r_max):
    """``P_x(N_{T^1(x)}(y) >= r)`` for r = 0..r_max+1, from absorbing solves.

    ``g_r(w)`` is the probability, from ``w``, of at least ``r`` visits to
    ``y`` (counting time 0) before hitting ``x``.  At ``y`` it is a one-step
    average of ``g_{r-1}``; elsewhere it solves the harmonic system with
    boundary values ``g_r(x) = 0`` and ``g_r(y)``.
    """
    if x == y:
        raise ValueError("need x != y")
    P = chain.P
    n = chain.n
    O = np.array([w for w in range(n) if w not in (x, y)], dtype=int)
    lu = scipy.linalg.lu_factor(np.eye(O.size) - P[np.ix_(O, O)]) if O.size else None
    g = np.ones(n)  # g_0
    tail = [1.0]
    for r in range(1, r_max + 2):
        prev = g.copy()
        if r - 1 >= 1:
            prev[x] = 0.0
        g = np.zeros(n)
        g[y] = P[y] @ prev
        if O.size:
            g[O] = scipy.linalg.lu_solve(lu, P[O, y] * g[y])
        # from x: first step, and returning to x ends the excursion
        gx = g.copy()
        gx[x] = 0.0
        tail.append(float(P[x] @ gx))
    return np.array(tail)


def excursion_visit_law(chain, x, y, r_max=20, trials=0, seed=DEFAULT_SEED, tol=1e-9):
    """Visits to ``y`` during one excursion from ``x`` follow ``P(N > r) = p_xy (1 - p_yx)**r``.

    ``N`` counts times in ``[0, T^1(x))``; ``P(N > r) = P(N >= r + 1)``.
    The exact law comes from :func:`excursion_tail_exact`, independent of
    the closed form.  With ``trials > 0`` a simulated tail is also compared
    within 3 sigma as a smoke test.
    """
    tail = excursion_tail_exact(chain, x, y, r_max)
    pxy = escape_probability(chain, x, y)
    pyx = escape_probability(chain, y, x)
    r = np.arange(r_max + 1)
    closed = pxy * (1 - pyx) ** r
    err = float(np.max(np.abs(tail[1:] - closed)))
    ctx = {"x": x, "y": y, "p_xy": pxy, "p_yx": pyx, "r_max": r_max}
    reports = [BoundReport("excursion-law", err, tol, err <= tol, ctx)]
    if trials:
        cum = kernels.cumulative_rows(chain.P)
        counts = kernels.visits_before_return(cum, x, y, 1, kernels.trial_states(seed, trials))
        emp = np.array([(counts > rr).mean() for rr in r])
        sig = np.sqrt(np.maximum(closed * (1 - closed), 0) / trials)
        dev = float(np.max(np.abs(emp - closed) - 3 * sig))
        reports.append(BoundReport("excursion-law-mc", dev, 0.0, dev <= 0,
                                   dict(ctx, trials=trials, seed=seed), hard=False))
    return reports


def kklv_bound(pi, d, x, y, k, eps):
    return math.exp(-(eps ** 2) * k / (4 * pi[x] * d[x, y]))


def kklv_tail_check(chain, x, y, k, eps, trials, seed, pi=None, d=None):
    """``P_x(N_{T^k(x)}(y) <= (1-eps) k pi(y)/pi(x)) <= exp(-eps^2 k / (4 pi(x) d(x, y)))``."""
    if x == y:
        raise ValueError("need x != y")
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    if k < 1:
        raise ValueError("k must be >= 1")
    if pi is None:
        pi = stationary_distribution(chain)
    if d is None:
        d = commute_distance(expected_hitting_times(chain))
    thresh = (1 - eps) * k * pi[y] / pi[x]
    cum = kernels.cumulative_rows(chain.P)
    counts = kernels.visits_before_return(cum, x, y, k, kernels.trial_states(seed, trials))
    # tiny relative widening keeps integer thresholds inclusive despite rounding in pi
    freq = float((counts <= math.floor(thresh * (1 + 1e-12) + 1e-12)).mean())
    b = kklv_bound(pi, d, x, y, k, eps)
    sig = _sigma(b, trials)
    return BoundReport("kklv-tail", freq, b + 3 * sig, freq <= b + 3 * sig,
                       {"x": x, "y": y, "k": k, "eps": eps, "bound": b, "threshold": thresh,
                        "trials": trials, "seed": seed}, low_confidence=trials < 30)


def key_estimate_bound(pi, d, x, y, k, l):
    a = (k - 1) / pi[x]
    b = (l - 1) / pi[y]
    if not b < a:
        raise PreconditionError(f"need (l-1)/pi(y) = {b:.6g} < (k-1)/pi(x) = {a:.6g}")
    return math.exp(-((a - b) ** 2) / (4 * d[x, y] * a))


def key_estimate_check(chain, z, x, y, k, l, trials, seed, pi=None, d=None):
    """``P_z(T^l(y) > T^k(x))`` against its exponential bound."""
    if x == y:
        raise ValueError("need x != y")
    if pi is None:
        pi = stationary_distribution(chain)
    if d is None:
        d = commute_distance(expected_hitting_times(chain))
    b = key_estimate_bound(pi, d, x, y, k, l)
    cum = kernels.cumulative_rows(chain.P)
    freq = float(kernels.race(cum, z, x, k, y, l, kernels.trial_states(seed, trials)).mean())
    sig = _sigma(b, trials)
    return BoundReport("key-estimate", freq, b + 3 * sig, freq <= b + 3 * sig,
                       {"z": z, "x": x, "y": y, "k": k, "l": l, "bound": b,
                        "trials": trials, "seed": seed}, low_confidence=trials < 30)


# --- chaining certificate -------------------------------------------------------


def chaining_schedule(d_sub, seq):
    """``(r, k0_factor)``: the tail sums ``r_n(x)`` and ``r_0`` for a sequence over ``A``.

    ``r[n, x] = sup_{y in A_n(x)} sum_{j >= n} 2**(j/2) sqrt(diam(A_j(y)))``
    with diameters in the commute metric ``d_sub``.
    """
    from .chaining import level_diameters

    npts = d_sub.shape[0]
    seq.validate(npts)
    if not seq.ends_in_singletons():
        raise ValueError("sequence must end with singletons")
    diam = level_diameters(d_sub, seq)
    L = diam.shape[0]
    terms = np.array([2.0 ** (j / 2) for j in range(L)])[:, None] * np.sqrt(diam)
    tails = np.cumsum(terms[::-1], axis=0)[::-1]  # tails[n, y] = sum_{j >= n}
    r = np.empty_like(tails)
    for n in range(L):
        lab = seq.labels(n, npts)
        for c in np.unique(lab):
            idx = lab == c
            r[n, idx] = tails[n, idx].max()
    return r


def chaining_cover_certificate(chain, A, z, seq, trials, seed, pi=None, h=None):
    """The explicit-constant chaining bound for ``E_z T_cov(A)``.

    With ``r_0 = sup_x sum_n 2**(n/2) sqrt(diam(A_n(x)))`` and
    ``k_0 = floor(34 pi(z) r_0**2) + 1``, checks by simulation that
    ``P_z(T_cov(A) <= T^{k_0}(z)) >= 7/8`` (up to 3 sigma), and exactly that
    ``E_z T_cov(A) <= (8/7) k_0 / pi(z)`` and ``<= 40 r_0**2``.
    """
    A = _check_subset(chain, A)
    if z not in A:
        raise ValueError("z must belong to A")
    if pi is None:
        pi = stationary_distribution(chain)
    if h is None:
        h = expected_hitting_times(chain)
    d = (h + h.T)[np.ix_(A, A)]
    r = chaining_schedule(d, seq)
    r0 = float(r[0].max())
    k0 = int(math.floor(34 * pi[z] * r0 * r0)) + 1
    exact = exact_cover_expectation(chain, A, z).value
    ctx = {"subset_size": len(A), "z": z, "r0": r0, "k0": k0, "cover": exact}
    if len(A) == 1:
        p, sig = 1.0, 0.0
    else:
        cum = kernels.cumulative_rows(chain.P)
        covered, _ = kernels.cover_by_return(cum, _as_groups(A), z, k0, kernels.trial_states(seed, trials), False)
        p = float(covered.mean())
        sig = _sigma(7 / 8, trials)
    return [
        BoundReport("chaining-cover-probability", 7 / 8, p + 3 * sig, 7 / 8 <= p + 3 * sig,
                    dict(ctx, p_hat=p, sigma=sig, trials=trials, seed=seed), low_confidence=0 < trials < 30),
        BoundReport("chaining-cover-restart", exact, 8 * k0 / (7 * pi[z]), exact <= 8 * k0 / (7 * pi[z]), ctx),
        BoundReport("chaining-cover-constant", exact, 40 * r0 * r0, exact <= 40 * r0 * r0, ctx),
    ]
