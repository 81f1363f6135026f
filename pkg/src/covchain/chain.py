"""Exact linear-algebra quantities of finite irreducible Markov chains.

Hitting times, stationary distribution, commute distance, detailed
balance and escape probabilities.  All routines are dense and exact up to
floating point; they are meant for chains with at most a few thousand
states.
"""
import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import CapacityError, NumericalError, StructuralError, ValidationError
from .reports import BoundReport, fmt

#: default cap on the number of states for dense hitting-time solves
MAX_STATES = 5000
#: default absolute tolerance of identity checks (scaled by matrix magnitude)
TOL = 1e-9


def scaled_tol(tol, *arrays):
    """``tol`` times the largest absolute entry (at least 1) among ``arrays``."""
    m = 1.0
    for a in arrays:
        a = np.asarray(a, dtype=float)
        finite = a[np.isfinite(a)]
        if finite.size:
            m = max(m, float(np.abs(finite).max()))
    return tol * m


@dataclass(frozen=True, eq=False)
class MarkovChain:
    """A row-stochastic transition matrix over ``n`` labelled states.

    Construction validates the matrix and checks irreducibility; an
    invalid chain never exists.
    """

    P: np.ndarray
    labels: tuple = field(default=None)

    def __post_init__(self):
        P = np.array(self.P, dtype=np.float64)
        if P.ndim != 2 or P.shape[0] != P.shape[1] or P.shape[0] == 0:
            raise StructuralError(f"transition matrix must be square and non-empty, got shape {P.shape}")
        if not np.all(np.isfinite(P)) or P.min() < 0 or P.max() > 1:
            raise StructuralError("transition probabilities must lie in [0, 1]")
        sums = P.sum(axis=1)
        bad = np.flatnonzero(np.abs(sums - 1.0) > 1e-12)
        if bad.size:
            raise StructuralError(f"row {int(bad[0])} sums to {sums[bad[0]]!r}, not 1")
        P.setflags(write=False)
        object.__setattr__(self, "P", P)
        labels = self.labels
        if labels is None:
            labels = tuple(str(i) for i in range(P.shape[0]))
        labels = tuple(labels)
        if len(labels) != P.shape[0]:
            raise StructuralError("label count does not match the number of states")
        object.__setattr__(self, "labels", labels)
        check_irreducible(P, labels)

    @property
    def n(self):
        return self.P.shape[0]

    @classmethod
    def from_weights(cls, W, labels=None):
        """Random walk on a weighted graph: P(x, y) = w(x, y) / deg(x)."""
        W = np.asarray(W, dtype=np.float64)
        if np.any(W < 0):
            raise StructuralError("edge weights must be nonnegative")
        deg = W.sum(axis=1)
        if np.any(deg <= 0):
            raise StructuralError(f"state {int(np.flatnonzero(deg <= 0)[0])} has no incident edge")
        return cls(W / deg[:, None], labels)


def check_irreducible(P, labels=None):
    """Raise :class:`StructuralError` unless the positive-entry digraph is strongly connected."""
    n = P.shape[0]
    ncomp, comp = connected_components(csr_matrix(P > 0), directed=True, connection="strong")
    if ncomp > 1:
        # report a component that the component of state 0 cannot reach, or vice versa
        lab = labels or [str(i) for i in range(n)]
        other = np.flatnonzero(comp != comp[0])
        names = ", ".join(lab[i] for i in other[:10])
        more = "" if other.size <= 10 else f" (+{other.size - 10} more)"
        raise StructuralError(
            f"chain is not irreducible: {ncomp} strongly connected components; "
            f"states {{{names}{more}}} are not mutually reachable with state {lab[0]}"
        )


def stationary_distribution(chain):
    """The unique invariant probability vector ``pi`` with ``pi P = pi``."""
    P = chain.P
    n = chain.n
    A = P.T - np.eye(n)
    A[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    try:
        pi = scipy.linalg.solve(A, b)
    except scipy.linalg.LinAlgError as exc:
        raise NumericalError(f"stationary solve failed: {exc}") from exc
    pi = np.clip(pi, 0.0, None)
    pi /= pi.sum()
    if np.any(pi <= 0):
        raise NumericalError("stationary distribution has a zero entry")
    if np.max(np.abs(pi @ P - pi)) > 1e-9:
        raise NumericalError("stationary solve residual above 1e-9")
    return pi


def expected_hitting_times(chain, max_states=MAX_STATES):
    """Matrix ``h`` with ``h[x, y] = E_x T(y)``, the expected hitting time of ``y`` from ``x``.

    One dense LU solve of ``(I - P) h = 1`` restricted to the states other
    than the target, per target.
    """
    n = chain.n
    if n > max_states:
        raise CapacityError(f"{n} states exceeds the dense hitting-time cap of {max_states}")
    P = chain.P
    h = np.zeros((n, n))
    idx = np.arange(n)
    for y in range(n):
        rest = idx[idx != y]
        if rest.size == 0:
            continue
        A = np.eye(rest.size) - P[np.ix_(rest, rest)]
        try:
            lu = scipy.linalg.lu_factor(A, check_finite=False)
        except (ValueError, scipy.linalg.LinAlgError) as exc:
            raise NumericalError(f"hitting-time system for target {y} is singular") from exc
        sol = scipy.linalg.lu_solve(lu, np.ones(rest.size), check_finite=False)
        resid = np.max(np.abs(A @ sol - 1.0))
        if not np.isfinite(resid) or resid > scaled_tol(TOL, sol):
            raise NumericalError(f"hitting-time residual {resid:.3g} for target {y}")
        h[rest, y] = sol
    return h


def commute_distance(h):
    """``d[x, y] = h[x, y] + h[y, x]``; validated as a metric."""
    h = np.asarray(h, dtype=float)
    d = h + h.T
    np.fill_diagonal(d, 0.0)
    check_metric(d, TOL)
    return d


def sqrt_metric(d):
    """Entrywise square root of a metric (again a metric)."""
    d = np.asarray(d, dtype=float)
    s = np.sqrt(d)
    check_metric(s, TOL)
    return s


def check_metric(d, tol=TOL, strict=True):
    """Raise :class:`ValidationError` unless ``d`` is a finite metric.

    Checks symmetry, zero diagonal, positive off-diagonal entries (when
    ``strict``) and the triangle inequality, with ``tol`` scaled by the
    largest entry.
    """
    d = np.asarray(d, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise ValidationError(f"metric must be a square matrix, got shape {d.shape}")
    n = d.shape[0]
    t = scaled_tol(tol, d)
    if not np.all(np.isfinite(d)):
        raise ValidationError("metric has non-finite entries")
    if np.max(np.abs(d - d.T), initial=0.0) > t:
        raise ValidationError("metric is not symmetric")
    if np.max(np.abs(np.diag(d)), initial=0.0) > t:
        raise ValidationError("metric has a nonzero diagonal")
    off = ~np.eye(n, dtype=bool)
    if strict and n > 1 and d[off].min() <= 0:
        raise ValidationError("metric has a non-positive off-diagonal entry")
    # d[x, z] <= d[x, y] + d[y, z] for all y
    for y in range(n):
        viol = d - (d[:, y][:, None] + d[y, :][None, :])
        if viol.max() > t:
            x, z = np.unravel_index(np.argmax(viol), viol.shape)
            raise ValidationError(f"triangle inequality fails for ({x}, {y}, {z}) by {viol.max():.3g}")
    return d


def is_reversible(chain, pi=None, tol=1e-12):
    """Detailed balance ``pi_x P[x, y] == pi_y P[y, x]`` for all pairs, within ``tol``."""
    if pi is None:
        pi = stationary_distribution(chain)
    flow = pi[:, None] * chain.P
    return bool(np.max(np.abs(flow - flow.T)) <= tol)


def _hit_before(P, target, avoid):
    """``u[w] = P_w(T(target) < T(avoid))`` for every state (absorbing solve)."""
    n = P.shape[0]
    u = np.zeros(n)
    u[target] = 1.0
    others = np.array([w for w in range(n) if w != target and w != avoid], dtype=int)
    if others.size:
        A = np.eye(others.size) - P[np.ix_(others, others)]
        u[others] = scipy.linalg.solve(A, P[others, target])
    return u


def escape_probability(chain, x, y):
    """``P_x(T(y) <= T^1(x))``: from ``x``, reach ``y`` before returning to ``x``."""
    if x == y:
        raise ValueError("escape probability needs x != y")
    u = _hit_before(chain.P, y, x)
    u[x] = 0.0
    return float(chain.P[x] @ u)


def return_times(chain, h=None):
    """Vector of expected first-return times ``E_x T^1(x) = 1 + sum_w P[x, w] h[w, x]``."""
    if h is None:
        h = expected_hitting_times(chain)
    return 1.0 + np.einsum("xw,wx->x", chain.P, h)


def return_time_identity_check(chain, tol=TOL, h=None, pi=None):
    """Check ``pi(x) E_x T^1(x) = 1`` and ``1/pi(x) <= d(x, y)`` for every pair.

    Returns one report per identity; ``lhs`` holds the worst violation.
    """
    if h is None:
        h = expected_hitting_times(chain)
    if pi is None:
        pi = stationary_distribution(chain)
    ret = return_times(chain, h)
    err = float(np.max(np.abs(ret * pi - 1.0)))
    d = h + h.T
    n = chain.n
    off = ~np.eye(n, dtype=bool)
    gap = (1.0 / pi)[:, None] - d
    worst = float(gap[off].max()) if n > 1 else -np.inf
    t = scaled_tol(tol, d)
    return [
        BoundReport("return-time-identity", err, tol, err <= tol,
                    {"n": n, "max_return_time": float(ret.max())}),
        BoundReport("return-time-vs-commute", worst, 0.0, worst <= t,
                    {"n": n, "tol": t}, slack=-worst),
    ]


# --- chain file I/O ---------------------------------------------------------


def chain_from_dict(obj):
    """Build a chain from ``{"matrix": ..., "labels": ...}`` or ``{"weighted_edges": ...}``."""
    if not isinstance(obj, dict):
        raise ValidationError("chain file must contain a JSON object")
    if "matrix" in obj:
        return MarkovChain(np.array(obj["matrix"], dtype=float), obj.get("labels"))
    if "weighted_edges" in obj:
        edges = obj["weighted_edges"]
        names = []
        for e in edges:
            if len(e) != 3:
                raise ValidationError(f"weighted edge {e!r} must be [u, v, weight]")
            names.extend(e[:2])
        if all(isinstance(v, int) for v in names):
            order = list(range(max(names) + 1))
        else:
            order = list(dict.fromkeys(names))
        index = {v: i for i, v in enumerate(order)}
        W = np.zeros((len(order), len(order)))
        for u, v, w in edges:
            if w <= 0:
                raise ValidationError(f"edge ({u}, {v}) has non-positive weight {w}")
            W[index[u], index[v]] += w
            if u != v:
                W[index[v], index[u]] += w
        labels = obj.get("labels") or [str(v) for v in order]
        return MarkovChain.from_weights(W, labels)
    raise ValidationError('chain file needs a "matrix" or a "weighted_edges" key')


def load_chain(path):
    with open(path) as fh:
        text = fh.read()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return chain_from_dict(obj)


def chain_to_dict(chain):
    return {"matrix": chain.P.tolist(), "labels": list(chain.labels)}


def dump_chain(chain, path):
    with open(path, "w") as fh:
        json.dump(chain_to_dict(chain), fh, indent=1)
        fh.write("\n")


def matrix_to_csv(M, labels=None):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if labels is not None:
        w.writerow([""] + list(labels))
    for i, row in enumerate(M):
        cells = [fmt(v) for v in row]
        w.writerow(([labels[i]] if labels is not None else []) + cells)
    return buf.getvalue()


def read_matrix_csv(path):
    """Read a plain numeric CSV matrix (no header)."""
    rows = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), 1):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                rows.append([float(c) for c in row])
            except ValueError as exc:
                raise ValidationError(f"{path}: line {lineno}: {exc}") from exc
    return np.array(rows, dtype=float)
