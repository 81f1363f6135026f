# cython: language_level=3
"""Compiled random-walk kernels.

Every kernel takes ``cum``, the row-wise cumulative transition matrix
produced by :func:`covchain.kernels.cumulative_rows`, and ``states``, one
splitmix64 state per trial.  Trials never share RNG state, so results do
not depend on the order in which trials are run.  The pure-numpy module
``_walk_py`` implements the same contracts bit for bit.
"""
import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t, int64_t
from libc.string cimport memset

cnp.import_array()

cdef uint64_t GAMMA = 0x9E3779B97F4A7C15ULL


cdef inline uint64_t _mix(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline double _uniform(uint64_t* s) noexcept nogil:
    s[0] += GAMMA
    return <double>(_mix(s[0]) >> 11) * (1.0 / 9007199254740992.0)


cdef inline Py_ssize_t _step(const double[:, ::1] cum, Py_ssize_t cur,
                             uint64_t* s) noexcept nogil:
    cdef double u = _uniform(s)
    cdef Py_ssize_t j = 0
    while u >= cum[cur, j]:
        j += 1
    return j


def cover_times(const double[:, ::1] cum, const int64_t[::1] group,
                Py_ssize_t ngroups, Py_ssize_t start,
                const uint64_t[::1] states):
    """Steps until every group has been visited (time 0 counts)."""
    cdef Py_ssize_t trials = states.shape[0]
    out = np.zeros(trials, dtype=np.int64)
    cdef int64_t[::1] o = out
    seen_arr = np.zeros(max(ngroups, 1), dtype=np.uint8)
    cdef unsigned char[::1] seen = seen_arr
    cdef Py_ssize_t t, cur, g, hit
    cdef int64_t steps
    cdef uint64_t s
    with nogil:
        for t in range(trials):
            if ngroups == 0:
                continue
            memset(&seen[0], 0, ngroups)
            s = states[t]
            cur = start
            steps = 0
            hit = 0
            g = group[cur]
            if g >= 0:
                seen[g] = 1
                hit = 1
            while hit < ngroups:
                cur = _step(cum, cur, &s)
                steps += 1
                g = group[cur]
                if g >= 0 and seen[g] == 0:
                    seen[g] = 1
                    hit += 1
            o[t] = steps
    return out


def cover_by_return(const double[:, ::1] cum, const int64_t[::1] group,
                    Py_ssize_t ngroups, Py_ssize_t z, int64_t k,
                    const uint64_t[::1] states, bint run_full):
    """Whether cover happens no later than the k-th return to ``z``.

    Returns ``(covered, tk)``.  ``tk`` is the k-th return time; when
    ``run_full`` is false a trial stops as soon as it is covered and its
    ``tk`` is reported as -1.
    """
    cdef Py_ssize_t trials = states.shape[0]
    covered = np.zeros(trials, dtype=np.uint8)
    tk = np.full(trials, -1, dtype=np.int64)
    cdef unsigned char[::1] c = covered
    cdef int64_t[::1] o = tk
    seen_arr = np.zeros(max(ngroups, 1), dtype=np.uint8)
    cdef unsigned char[::1] seen = seen_arr
    cdef Py_ssize_t t, cur, g, hit
    cdef int64_t steps, returns
    cdef uint64_t s
    with nogil:
        for t in range(trials):
            memset(&seen[0], 0, seen.shape[0])
            s = states[t]
            cur = z
            steps = 0
            returns = 0
            hit = 0
            g = group[cur]
            if g >= 0:
                seen[g] = 1
                hit = 1
            if hit >= ngroups:
                c[t] = 1
                if not run_full:
                    continue
            while True:
                cur = _step(cum, cur, &s)
                steps += 1
                g = group[cur]
                if g >= 0 and seen[g] == 0:
                    seen[g] = 1
                    hit += 1
                if hit >= ngroups and c[t] == 0:
                    c[t] = 1
                    if not run_full:
                        break
                if cur == z:
                    returns += 1
                    if returns == k:
                        o[t] = steps
                        break
    return covered, tk


def visits_before_return(const double[:, ::1] cum, Py_ssize_t x, Py_ssize_t y,
                         int64_t k, const uint64_t[::1] states):
    """Visits to ``y`` in the time window [0, T^k(x)) for a walk from ``x``."""
    cdef Py_ssize_t trials = states.shape[0]
    out = np.zeros(trials, dtype=np.int64)
    cdef int64_t[::1] o = out
    cdef Py_ssize_t t, cur
    cdef int64_t returns, visits
    cdef uint64_t s
    with nogil:
        for t in range(trials):
            s = states[t]
            cur = x
            returns = 0
            visits = 1 if x == y else 0
            while True:
                cur = _step(cum, cur, &s)
                if cur == x:
                    returns += 1
                    if returns == k:
                        break
                if cur == y:
                    visits += 1
            o[t] = visits
    return out


def race(const double[:, ::1] cum, Py_ssize_t z, Py_ssize_t x, int64_t k,
         Py_ssize_t y, int64_t l, const uint64_t[::1] states):
    """Indicator of T^l(y) > T^k(x) for a walk started at ``z`` (x != y)."""
    cdef Py_ssize_t trials = states.shape[0]
    out = np.zeros(trials, dtype=np.uint8)
    cdef unsigned char[::1] o = out
    cdef Py_ssize_t t, cur
    cdef int64_t nx, ny
    cdef uint64_t s
    with nogil:
        for t in range(trials):
            s = states[t]
            cur = z
            nx = 0
            ny = 0
            while True:
                cur = _step(cum, cur, &s)
                if cur == x:
                    nx += 1
                    if nx == k:
                        o[t] = 1
                        break
                elif cur == y:
                    ny += 1
                    if ny == l:
                        break
    return out


def trajectory(const double[:, ::1] cum, Py_ssize_t start, int64_t horizon,
               uint64_t state):
    """The path X_0, ..., X_{horizon-1}."""
    out = np.empty(horizon, dtype=np.int64)
    cdef int64_t[::1] o = out
    cdef int64_t i
    cdef Py_ssize_t cur = start
    cdef uint64_t s = state
    if horizon == 0:
        return out
    with nogil:
        o[0] = cur
        for i in range(1, horizon):
            cur = _step(cum, cur, &s)
            o[i] = cur
    return out
