"""Backend selection and seeding for the random-walk kernels.

The compiled extension ``covchain._walk`` is used when importable; the
numpy module ``covchain._walk_py`` is the fallback.  Set the environment
variable ``COVCHAIN_PURE=1`` to force the fallback.  Both backends consume
the same per-trial splitmix64 streams and return identical arrays.
"""
import os
import warnings

import numpy as np

from . import _walk_py

MASK64 = (1 << 64) - 1

if os.environ.get("COVCHAIN_PURE"):
    _backend = _walk_py
    BACKEND = "python"
else:
    try:
        from . import _walk as _backend  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError as exc:  # pragma: no cover - depends on build
        warnings.warn(f"covchain: compiled kernels unavailable ({exc}); using numpy fallback")
        _backend = _walk_py
        BACKEND = "python"


def get_backend(name=None):
    """Return the kernel module for ``name`` ("compiled", "python" or None for the default)."""
    if name is None:
        return _backend
    if name == "python":
        return _walk_py
    if name == "compiled":
        from . import _walk  # type: ignore[attr-defined]

        return _walk
    raise ValueError(f"unknown backend {name!r}")


def trial_states(seed, trials, offset=0):
    """Initial RNG state for trials ``offset .. offset+trials-1`` of master ``seed``.

    Counter-based: trial i's state depends only on (seed, i), so any split
    of the trial range reproduces the same per-trial streams.
    """
    base = _walk_py.mix64(np.uint64(int(seed) & MASK64))
    idx = np.arange(offset, offset + trials, dtype=np.uint64)
    return _walk_py.mix64(base + idx)


def cumulative_rows(P):
    """Row-wise cumulative sums with the tail pinned to exactly 1.0.

    Entries from each row's last positive probability onward are set to
    1.0 so a uniform draw in [0, 1) always lands on a positive entry.
    """
    P = np.asarray(P, dtype=np.float64)
    cum = np.cumsum(P, axis=1)
    for i, row in enumerate(P):
        last = np.flatnonzero(row > 0)[-1]
        cum[i, last:] = 1.0
    return np.ascontiguousarray(cum)


def group_vector(n, groups):
    """Map each state to the index of the group containing it (-1 if none)."""
    g = np.full(n, -1, dtype=np.int64)
    for i, members in enumerate(groups):
        for v in members:
            if g[v] != -1:
                raise ValueError(f"state {v} belongs to more than one group")
            g[v] = i
    return g


def cover_times(cum, groups, start, states, backend=None):
    n = cum.shape[0]
    g = group_vector(n, groups)
    return get_backend(backend).cover_times(cum, g, len(groups), int(start), states)


def cover_by_return(cum, groups, z, k, states, run_full=True, backend=None):
    if k < 1:
        raise ValueError("k must be >= 1")
    g = group_vector(cum.shape[0], groups)
    return get_backend(backend).cover_by_return(
        cum, g, len(groups), int(z), int(k), states, bool(run_full)
    )


def visits_before_return(cum, x, y, k, states, backend=None):
    if k < 1:
        raise ValueError("k must be >= 1")
    return get_backend(backend).visits_before_return(cum, int(x), int(y), int(k), states)


def race(cum, z, x, k, y, l, states, backend=None):
    if x == y:
        raise ValueError("race needs distinct x and y")
    if k < 1 or l < 1:
        raise ValueError("k and l must be >= 1")
    return get_backend(backend).race(cum, int(z), int(x), int(k), int(y), int(l), states)


def trajectory(cum, start, horizon, seed, backend=None):
    state = int(trial_states(seed, 1)[0])
    return get_backend(backend).trajectory(cum, int(start), int(horizon), np.uint64(state))
