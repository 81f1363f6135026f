"""Generators for test chains: standard graphs, the two-state chain, the
deterministic cycle and the weighted tree with per-level branching
N_i + 1 and edge multiplicity 2^i.
"""
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .chain import MarkovChain, expected_hitting_times, commute_distance
from .errors import CapacityError
from .reports import BoundReport


def N(n):
    """Cardinality budget: N_0 = 1 and N_n = 2**(2**n)."""
    return 1 if n == 0 else 2 ** (2 ** n)


@dataclass
class WeightedGraph:
    """Undirected graph with positive integer (or rational) edge weights."""

    n: int
    edges: list  # (u, v, weight) with u != v, each undirected edge once

    def __post_init__(self):
        for u, v, w in self.edges:
            if u == v:
                raise ValueError(f"self-loop at {u}")
            if not 0 <= u < self.n or not 0 <= v < self.n:
                raise ValueError(f"edge ({u}, {v}) out of range")
            if w <= 0:
                raise ValueError(f"edge ({u}, {v}) has non-positive weight")

    def weight_matrix(self):
        W = np.zeros((self.n, self.n))
        for u, v, w in self.edges:
            W[u, v] += float(w)
            W[v, u] += float(w)
        return W

    def degrees(self):
        deg = [0] * self.n
        for u, v, w in self.edges:
            deg[u] += w
            deg[v] += w
        return deg

    @property
    def total_weight(self):
        return sum(w for _, _, w in self.edges)

    def exact_stationary(self):
        """``pi(x) = deg(x) / 2E`` as exact fractions."""
        two_e = 2 * Fraction(self.total_weight)
        return [Fraction(dx) / two_e for dx in self.degrees()]

    def chain(self, labels=None):
        return MarkovChain.from_weights(self.weight_matrix(), labels)


def _undirected(n, pairs):
    W = np.zeros((n, n))
    for u, v in pairs:
        W[u, v] += 1.0
        W[v, u] += 1.0
    return MarkovChain.from_weights(W)


def complete_graph(n):
    if n < 2:
        raise ValueError("complete_graph needs n >= 2")
    return _undirected(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def path(n):
    if n < 2:
        raise ValueError("path needs n >= 2")
    return _undirected(n, [(i, i + 1) for i in range(n - 1)])


def cycle_srw(n):
    if n < 3:
        raise ValueError("cycle_srw needs n >= 3")
    return _undirected(n, [(i, (i + 1) % n) for i in range(n)])


def directed_cycle(n):
    if n < 2:
        raise ValueError("directed_cycle needs n >= 2")
    P = np.zeros((n, n))
    P[np.arange(n), (np.arange(n) + 1) % n] = 1.0
    return MarkovChain(P)


def torus_2d(rows, cols=None):
    cols = rows if cols is None else cols
    if rows < 3 or cols < 3:
        raise ValueError("torus_2d needs both sides >= 3")
    idx = lambda r, c: (r % rows) * cols + (c % cols)  # noqa: E731
    pairs = []
    for r in range(rows):
        for c in range(cols):
            pairs.append((idx(r, c), idx(r + 1, c)))
            pairs.append((idx(r, c), idx(r, c + 1)))
    return _undirected(rows * cols, pairs)


def two_state(eps):
    """Both rows equal (eps, 1 - eps): the chain forgets its state every step."""
    eps = float(eps)
    if not 0 < eps < 1:
        raise ValueError("two_state needs 0 < eps < 1")
    return MarkovChain([[eps, 1 - eps], [eps, 1 - eps]])


def weighted_graph(edges, n=None):
    edges = [(int(u), int(v), w) for u, v, w in edges]
    if n is None:
        n = 1 + max(max(u, v) for u, v, _ in edges)
    return WeightedGraph(n, edges).chain()


def random_graph(n, seed=0, p=0.4, wmax=5):
    """Connected random graph with integer weights in [1, wmax] (a spanning path is always included)."""
    if n < 2:
        raise ValueError("random_graph needs n >= 2")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    edges = {}
    for a, b in zip(perm[:-1], perm[1:]):
        edges[(min(a, b), max(a, b))] = int(rng.integers(1, wmax + 1))
    for i in range(n):
        for j in range(i + 1, n):
            if (i, j) not in edges and rng.random() < p:
                edges[(i, j)] = int(rng.integers(1, wmax + 1))
    return WeightedGraph(n, [(int(u), int(v), w) for (u, v), w in sorted(edges.items())])


def random_chain(n, seed=0, density=0.5):
    """Irreducible, generally non-reversible chain: a random cycle plus random extra transitions."""
    if n < 2:
        raise ValueError("random_chain needs n >= 2")
    rng = np.random.default_rng(seed)
    W = rng.random((n, n)) * (rng.random((n, n)) < density)
    perm = rng.permutation(n)
    W[perm, np.roll(perm, -1)] += 0.5 + rng.random(n)
    return MarkovChain(W / W.sum(axis=1, keepdims=True))


def pair_star(m, inner=40, hub=1, seed=None):
    """Hub 0 joined to ``m`` pairs {2i+1, 2i+2}; pair edges weigh ``inner``, hub edges ``hub``.

    Heavy inner edges make each pair tight in commute distance while
    different pairs stay far apart.  With ``seed`` the weights are jittered
    (inner in [inner/2, 3 inner/2], hub in [hub, 3 hub]).
    """
    rng = np.random.default_rng(seed) if seed is not None else None
    edges = []
    for i in range(m):
        a, b = 2 * i + 1, 2 * i + 2
        wi = inner if rng is None else int(rng.integers(max(1, inner // 2), 3 * inner // 2 + 1))
        wh = hub if rng is None else int(rng.integers(hub, 3 * hub + 1))
        edges.append((a, b, wi))
        edges.append((0, a, wh))
    return WeightedGraph(2 * m + 1, edges)


KINDS = {
    "complete_graph": complete_graph,
    "path": path,
    "cycle_srw": cycle_srw,
    "directed_cycle": directed_cycle,
    "torus_2d": torus_2d,
    "two_state": two_state,
    "weighted_graph": weighted_graph,
    "random_graph": lambda n, seed=0, p=0.4, wmax=5: random_graph(n, seed, p, wmax).chain(),
    "random_chain": random_chain,
    "pair_star": lambda m, inner=40, hub=1, seed=None: pair_star(m, inner, hub, seed).chain(),
}


def make_zoo_chain(kind, **params):
    """Build a chain by name; raises ``ValueError`` on unknown kinds or bad parameters."""
    if kind == "kklv_tree":
        return kklv_tree(**params)[1]
    try:
        fn = KINDS[kind]
    except KeyError:
        raise ValueError(f"unknown chain kind {kind!r}; choose from {sorted(KINDS) + ['kklv_tree']}") from None
    try:
        return fn(**params)
    except TypeError as exc:
        raise ValueError(f"bad parameters for {kind}: {exc}") from exc


def parse_params(text):
    """Parse ``"n=4,eps=0.3"`` into a dict of ints/floats/strings."""
    out = {}
    if not text:
        return out
    for item in text.split(","):
        if not item.strip():
            continue
        if "=" not in item:
            raise ValueError(f"parameter {item!r} is not of the form key=value")
        k, v = item.split("=", 1)
        v = v.strip()
        for conv in (int, float):
            try:
                v = conv(v)
                break
            except ValueError:
                pass
        out[k.strip()] = v
    return out


# --- the weighted tree ------------------------------------------------------


@dataclass
class TreeSpec:
    """Rooted tree of depth ``D``; nodes in breadth-first order, root = 0.

    A node at depth ``i < D`` has ``N(i) + 1`` children and the edges from
    depth ``i`` to ``i + 1`` carry multiplicity ``2**i``.
    """

    D: int
    depth: np.ndarray
    parent: np.ndarray
    children: list
    ancestors: np.ndarray  # ancestors[v, j] = ancestor of v at depth j (or -1)

    @property
    def n(self):
        return len(self.depth)

    def multiplicity(self, child):
        return 2 ** int(self.depth[child] - 1)

    @property
    def total_weight(self):
        return int(sum(self.multiplicity(v) for v in range(1, self.n)))

    def graph(self):
        return WeightedGraph(self.n, [(int(self.parent[v]), v, self.multiplicity(v)) for v in range(1, self.n)])

    def prefix_set(self, i):
        """Vertices of depth at most ``i``."""
        return np.flatnonzero(self.depth <= i)

    def common_ancestor_depth(self, x, y):
        ax, ay = self.ancestors[x], self.ancestors[y]
        same = (ax == ay) & (ax >= 0)
        return int(np.flatnonzero(same).max())

    def in_subtree(self, v, root):
        """Whether ``v`` is ``root`` or one of its offspring."""
        return self.ancestors[v, self.depth[root]] == root

    def path_edges(self, x, y):
        """Child endpoints of the tree edges on the path between ``x`` and ``y``."""
        c = self.common_ancestor_depth(x, y)
        out = []
        for v in (x, y):
            while self.depth[v] > c:
                out.append(int(v))
                v = self.parent[v]
        return out


def tree_spec(D, max_depth=4):
    if not 1 <= D <= max_depth:
        raise CapacityError(f"tree depth must be in [1, {max_depth}], got {D}")
    depth, parent, children = [0], [-1], [[]]
    frontier = [0]
    for i in range(D):
        nxt = []
        for v in frontier:
            for _ in range(N(i) + 1):
                c = len(depth)
                depth.append(i + 1)
                parent.append(v)
                children.append([])
                children[v].append(c)
                nxt.append(c)
        frontier = nxt
    depth = np.array(depth)
    parent = np.array(parent)
    anc = np.full((len(depth), D + 1), -1, dtype=np.int64)
    for v in range(len(depth)):
        u = v
        while u >= 0:
            anc[v, depth[u]] = u
            u = parent[u]
    return TreeSpec(D, depth, parent, children, anc)


def kklv_tree(D):
    """The weighted tree of depth ``D`` and the random walk on it.

    The chain is dense, so ``D <= 3`` (183 states); ``tree_spec`` builds the
    bare tree up to ``D = 4``.
    """
    if not 1 <= D <= 3:
        raise CapacityError(
            f"kklv_tree chain needs 1 <= D <= 3 (D = 4 has 43873 states; use tree_spec for the structure)"
        )
    tree = tree_spec(D)
    return tree, tree.graph().chain()


def tree_commute_checks(tree, chain, pairs=500, seed=0, d=None, rtol=1e-6):
    """Edge commute formula, path additivity and the depth sandwich on the tree."""
    if d is None:
        d = commute_distance(expected_hitting_times(chain))
    E = tree.total_weight
    reports = []
    worst = 0.0
    for v in range(1, tree.n):
        i = int(tree.depth[v]) - 1
        want = 2 * E * 2.0 ** (-i)
        worst = max(worst, abs(d[tree.parent[v], v] - want) / want)
    reports.append(BoundReport("tree-edge-commute", worst, rtol, worst <= rtol,
                               {"D": tree.D, "E": E, "edges": tree.n - 1}))
    rng = np.random.default_rng(seed)
    add_err = 0.0
    below = above = 0
    worst_lo = worst_hi = -np.inf
    for _ in range(pairs):
        x, y = rng.choice(tree.n, size=2, replace=False)
        edge_sum = sum(d[tree.parent[c], c] for c in tree.path_edges(x, y))
        add_err = max(add_err, abs(edge_sum - d[x, y]) / d[x, y])
        i = tree.common_ancestor_depth(x, y)
        lo, hi = E * 2.0 ** (-i + 1), E * 2.0 ** (-i + 3)
        worst_lo = max(worst_lo, (lo - d[x, y]) / lo)
        worst_hi = max(worst_hi, (d[x, y] - hi) / hi)
        below += d[x, y] < lo * (1 - rtol)
        above += d[x, y] > hi * (1 + rtol)
    reports.append(BoundReport("tree-path-additivity", add_err, rtol, add_err <= rtol,
                               {"D": tree.D, "pairs": pairs}))
    reports.append(BoundReport("tree-depth-sandwich", below + above, 0, below + above == 0,
                               {"D": tree.D, "pairs": pairs, "worst_lower_rel": worst_lo,
                                "worst_upper_rel": worst_hi}))
    return reports


def shifted_prefix_nets(tree):
    """M_0 = M_1 = M_2 = S_0 and M_i = S_{i-3}, up to the first net equal to the whole tree."""
    nets = [tree.prefix_set(0)] * 3
    for i in range(tree.D + 1):
        nets.append(tree.prefix_set(i))
    return nets


def adversarial_descent(tree, nets):
    """Walk from the root, each time into the lowest-index child whose subtree avoids ``nets[i]``.

    Returns the leaf reached.  Such a child exists whenever
    ``len(nets[i]) <= N(i)`` because there are ``N(i) + 1`` children with
    disjoint subtrees.
    """
    x = 0
    for i in range(tree.D):
        members = np.asarray(nets[i], dtype=int) if i < len(nets) else np.array([], dtype=int)
        hit = set(int(a) for a in tree.ancestors[members, i + 1] if a >= 0) if members.size else set()
        free = [c for c in tree.children[x] if c not in hit]
        if not free:
            raise ValueError(f"net {i} has {members.size} points and meets every child subtree of node {x}")
        x = free[0]
    return x


def tree_gamma_scaling(depths=(1, 2, 3), seed=0):
    """Measured gamma estimates on the tree's commute metric against D*E and D*sqrt(E).

    Returns ``(rows, reports)``: one row per depth with the estimates and
    their ratios, plus the hard adversarial-certificate reports and soft
    ratio reports.
    """
    from .chaining import (
        exact_gamma,
        gamma_lower_packing,
        greedy_gamma_upper,
        net_functional_value,
    )

    rows, reports = [], []
    for D in depths:
        tree, chain = kklv_tree(D)
        d = commute_distance(expected_hitting_times(chain))
        sd = np.sqrt(d)
        E = tree.total_weight
        up1 = greedy_gamma_upper(d, 1).value
        lo1 = gamma_lower_packing(d, 1).value
        up2 = greedy_gamma_upper(sd, 2).value
        lo2 = gamma_lower_packing(sd, 2).value
        ex1 = exact_gamma(d, 1).value if tree.n <= 6 else None
        nets = shifted_prefix_nets(tree)
        leaf = adversarial_descent(tree, nets)
        cert = sum(2.0 ** i * d[leaf, nets[i]].min() for i in range(D))
        net_val = net_functional_value(d, nets)
        rows.append({
            "D": D, "E": E, "states": tree.n,
            "gamma1_upper": up1, "gamma1_lower": lo1, "gamma1_exact": ex1,
            "gamma2_sqrt_upper": up2, "gamma2_sqrt_lower": lo2,
            "ratio_gamma1_upper_DE": up1 / (D * E), "ratio_gamma1_lower_DE": lo1 / (D * E),
            "ratio_gamma2_upper_DsqrtE": up2 / (D * np.sqrt(E)),
            "ratio_gamma2_lower_DsqrtE": lo2 / (D * np.sqrt(E)),
            "certificate": cert, "net_value": net_val,
        })
        reports.append(BoundReport("tree-adversarial-net", 2 * E * D, cert, cert >= 2 * E * D * (1 - 1e-9),
                                   {"D": D, "E": E, "leaf": leaf}))
        prefix = [tree.prefix_set(i) for i in range(D + 1)]
        prefix_val = max(sum(2.0 ** i * d[x, s].min() for i, s in enumerate(prefix)) for x in range(tree.n))
        rows[-1]["prefix_value"] = prefix_val
        reports.append(BoundReport("tree-prefix-net-upper", prefix_val, 8 * E * (D + 1),
                                   prefix_val <= 8 * E * (D + 1) * (1 + 1e-9), {"D": D, "E": E}))
        reports.append(BoundReport("tree-shifted-net-ratio", net_val / (D * E), np.inf, True,
                                   {"D": D, "net_value": net_val}, hard=False))
    # single measured constant C with D*E/C <= gamma1 <= C*D*E over the depth range
    c_meas = max(max(r["ratio_gamma1_upper_DE"], 1 / r["ratio_gamma1_lower_DE"]) for r in rows)
    reports.append(BoundReport("tree-gamma1-bracket", c_meas, np.inf, True,
                               {"depths": list(depths), "measured_C": c_meas}, hard=False))
    return rows, reports
