"""Pure-numpy random-walk kernels.

Same contracts and the same splitmix64 stream as the compiled ``_walk``
module, vectorised across trials instead of looping over them.  Used when
the extension is not built or when ``COVCHAIN_PURE=1``.
"""
import numpy as np

GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30, _S27, _S31, _S11 = (np.uint64(v) for v in (30, 27, 31, 11))
_INV53 = 1.0 / 9007199254740992.0


def mix64(z):
    """splitmix64 finaliser (wrapping uint64 arithmetic)."""
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> _S30)) * _M1
        z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def _uniform(s):
    """Advance ``s`` in place and return one double in [0, 1) per entry."""
    s += GAMMA
    return (mix64(s) >> _S11).astype(np.float64) * _INV53


def _step(cum, cur, s):
    u = _uniform(s)
    # first j with u < cum[cur, j] == number of entries <= u (rows are monotone)
    return (cum[cur] <= u[:, None]).sum(axis=1)


def cover_times(cum, group, ngroups, start, states):
    trials = len(states)
    out = np.zeros(trials, dtype=np.int64)
    if ngroups == 0 or trials == 0:
        return out
    s = np.array(states, dtype=np.uint64)
    seen = np.zeros((trials, ngroups), dtype=bool)
    hit = np.zeros(trials, dtype=np.int64)
    g0 = group[start]
    if g0 >= 0:
        seen[:, g0] = True
        hit[:] = 1
    cur = np.full(trials, start, dtype=np.int64)
    active = np.flatnonzero(hit < ngroups)
    steps = 0
    while active.size:
        steps += 1
        sa = s[active]
        nxt = _step(cum, cur[active], sa)
        s[active] = sa
        cur[active] = nxt
        g = group[nxt]
        mark = g >= 0
        rows, gs = active[mark], g[mark]
        new = ~seen[rows, gs]
        seen[rows[new], gs[new]] = True
        hit[rows[new]] += 1
        done = hit[active] >= ngroups
        out[active[done]] = steps
        active = active[~done]
    return out


def cover_by_return(cum, group, ngroups, z, k, states, run_full):
    trials = len(states)
    covered = np.zeros(trials, dtype=np.uint8)
    tk = np.full(trials, -1, dtype=np.int64)
    if trials == 0:
        return covered, tk
    s = np.array(states, dtype=np.uint64)
    seen = np.zeros((trials, max(ngroups, 1)), dtype=bool)
    hit = np.zeros(trials, dtype=np.int64)
    returns = np.zeros(trials, dtype=np.int64)
    g0 = group[z]
    if g0 >= 0:
        seen[:, g0] = True
        hit[:] = 1
    covered[hit >= ngroups] = 1
    cur = np.full(trials, z, dtype=np.int64)
    active = np.arange(trials) if run_full else np.flatnonzero(covered == 0)
    steps = 0
    while active.size:
        steps += 1
        sa = s[active]
        nxt = _step(cum, cur[active], sa)
        s[active] = sa
        cur[active] = nxt
        g = group[nxt]
        mark = g >= 0
        rows, gs = active[mark], g[mark]
        new = ~seen[rows, gs]
        seen[rows[new], gs[new]] = True
        hit[rows[new]] += 1
        now_cov = hit[active] >= ngroups
        covered[active[now_cov]] = 1
        stop = np.zeros(active.size, dtype=bool)
        if not run_full:
            stop |= now_cov
        ret = (nxt == z) & ~stop
        returns[active[ret]] += 1
        last = ret & (returns[active] == k)
        tk[active[last]] = steps
        stop |= last
        active = active[~stop]
    return covered, tk


def visits_before_return(cum, x, y, k, states):
    trials = len(states)
    out = np.full(trials, 1 if x == y else 0, dtype=np.int64)
    if trials == 0:
        return out
    s = np.array(states, dtype=np.uint64)
    returns = np.zeros(trials, dtype=np.int64)
    cur = np.full(trials, x, dtype=np.int64)
    active = np.arange(trials)
    while active.size:
        sa = s[active]
        nxt = _step(cum, cur[active], sa)
        s[active] = sa
        cur[active] = nxt
        at_x = nxt == x
        returns[active[at_x]] += 1
        done = at_x & (returns[active] == k)
        out[active[(nxt == y) & ~done]] += 1
        active = active[~done]
    return out


def race(cum, z, x, k, y, l, states):
    trials = len(states)
    out = np.zeros(trials, dtype=np.uint8)
    if trials == 0:
        return out
    s = np.array(states, dtype=np.uint64)
    nx = np.zeros(trials, dtype=np.int64)
    ny = np.zeros(trials, dtype=np.int64)
    cur = np.full(trials, z, dtype=np.int64)
    active = np.arange(trials)
    while active.size:
        sa = s[active]
        nxt = _step(cum, cur[active], sa)
        s[active] = sa
        cur[active] = nxt
        nx[active[nxt == x]] += 1
        ny[active[nxt == y]] += 1
        won = nx[active] == k
        lost = ny[active] == l
        out[active[won]] = 1
        active = active[~(won | lost)]
    return out


def trajectory(cum, start, horizon, state):
    out = np.empty(horizon, dtype=np.int64)
    if horizon == 0:
        return out
    s = np.array([state], dtype=np.uint64)
    cur = np.array([start], dtype=np.int64)
    out[0] = start
    for i in range(1, horizon):
        cur = _step(cum, cur, s)
        out[i] = cur[0]
    return out
