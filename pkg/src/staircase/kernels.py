"""Hot array kernels with a numba path and a pure-numpy fallback.

The backend is chosen once at import from ``STAIRCASE_ACCEL`` (``numba`` or
``numpy``); numba is the default whenever it imports.  Arrays with
``dtype=object`` (levels beyond int64) always take the numpy path, since numba
cannot compile Python integers.

Every public kernel has both implementations exposed as ``<name>_numba`` and
``<name>_numpy`` so that tests and the benchmark can compare them directly.
The two oracle kernels (``stack``, ``shifted_overlap``) are pure block copies
and masked counts where numpy is faster, so their dispatchers ignore the flag.
"""
from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrapper(f):
            return f

        if len(args) == 1 and callable(args[0]):
            return args[0]
        return wrapper


def _select_backend() -> str:
    wanted = os.environ.get("STAIRCASE_ACCEL", "").strip().lower()
    if wanted in ("numpy", "off", "0", "none"):
        return "numpy"
    if wanted in ("", "numba", "on", "1"):
        return "numba" if HAVE_NUMBA else "numpy"
    raise ValueError(f"STAIRCASE_ACCEL must be 'numba' or 'numpy', got {wanted!r}")


BACKEND = _select_backend()

# Largest level index stored in int64 arrays; anything above goes to object arrays.
INT64_LEVEL_LIMIT = 2**62


def level_dtype(top: int):
    return np.int64 if top < INT64_LEVEL_LIMIT else object


def as_level_array(values, top: int) -> np.ndarray:
    return np.asarray(list(values) if not isinstance(values, np.ndarray) else values,
                      dtype=level_dtype(top))


def _fast(*arrays) -> bool:
    return BACKEND == "numba" and all(a.dtype == np.int64 for a in arrays)


# ---------------------------------------------------------------- refinement


@njit(cache=True)
def _refine_nb(levels, offsets):
    n = levels.shape[0]
    out = np.empty(n * offsets.shape[0], dtype=np.int64)
    k = 0
    for i in range(offsets.shape[0]):
        o = offsets[i]
        for a in range(n):
            out[k] = o + levels[a]
            k += 1
    return out


def refine_numba(levels: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    return _refine_nb(levels, offsets)


def refine_numpy(levels: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    return (offsets[:, None] + levels[None, :]).ravel()


def refine(levels: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    """Copy a sorted level array into every column; output stays sorted.

    Sortedness relies on columns being disjoint blocks ordered by offset, which
    holds because every column is a full copy of the coarser tower.
    """
    if _fast(levels, offsets):
        return refine_numba(levels, offsets)
    return refine_numpy(levels, offsets)


# ------------------------------------------------------------------- descent


@njit(cache=True)
def _descend_nb(levels, offsets, h):
    n = levels.shape[0]
    r = offsets.shape[0]
    cols = np.empty(n, dtype=np.int64)
    local = np.empty(n, dtype=np.int64)
    for a in range(n):
        x = levels[a]
        lo = 0
        hi = r
        # last index with offsets[idx] <= x
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if offsets[mid] <= x:
                lo = mid
            else:
                hi = mid
        cols[a] = lo
        local[a] = x - offsets[lo]
    inside = local <= h
    return cols, local, inside


def descend_numba(levels, offsets, h):
    return _descend_nb(levels, offsets, np.int64(h))


def descend_numpy(levels, offsets, h):
    cols = np.searchsorted(offsets, levels, side="right") - 1
    local = levels - offsets[cols]
    return cols, local, local <= h


def descend(levels: np.ndarray, offsets: np.ndarray, h: int):
    """Locate fine levels inside the coarse tower one stage down.

    Returns ``(cols, local, inside)`` with 0-based column indices, the height
    above the column bottom, and a mask that is False for spacer cells.
    """
    if _fast(levels, offsets):
        return descend_numba(levels, offsets, h)
    return descend_numpy(levels, offsets, h)


# -------------------------------------------------------------- membership


@njit(cache=True)
def _count_in_sorted_nb(query, table):
    n = table.shape[0]
    total = 0
    for a in range(query.shape[0]):
        x = query[a]
        lo = 0
        hi = n
        while lo < hi:
            mid = (lo + hi) // 2
            if table[mid] < x:
                lo = mid + 1
            else:
                hi = mid
        if lo < n and table[lo] == x:
            total += 1
    return total


def count_in_sorted_numba(query, table) -> int:
    if table.shape[0] == 0:
        return 0
    return int(_count_in_sorted_nb(query, table))


def count_in_sorted_numpy(query, table) -> int:
    if table.shape[0] == 0 or query.shape[0] == 0:
        return 0
    idx = np.searchsorted(table, query, side="left")
    idx = np.minimum(idx, table.shape[0] - 1)
    return int(np.count_nonzero(table[idx] == query))


def count_in_sorted(query: np.ndarray, table: np.ndarray) -> int:
    """Number of entries of ``query`` (any order) present in sorted ``table``."""
    if _fast(query, table):
        return count_in_sorted_numba(query, table)
    return count_in_sorted_numpy(query, table)


# ----------------------------------------------------- oracle cell kernels


@njit(cache=True)
def _stack_nb(ind, spacers):
    size = ind.shape[0]
    total = size * spacers.shape[0]
    for i in range(spacers.shape[0]):
        total += spacers[i]
    out = np.zeros(total, dtype=np.bool_)
    pos = 0
    for i in range(spacers.shape[0]):
        out[pos:pos + size] = ind
        pos += size + spacers[i]
    return out


def stack_numba(ind: np.ndarray, spacers: np.ndarray) -> np.ndarray:
    return _stack_nb(ind, spacers.astype(np.int64))


def stack_numpy(ind: np.ndarray, spacers: np.ndarray) -> np.ndarray:
    parts = []
    for s in spacers.tolist():
        parts.append(ind)
        if s:
            parts.append(np.zeros(s, dtype=bool))
    return np.concatenate(parts)


def stack(ind: np.ndarray, spacers: np.ndarray) -> np.ndarray:
    """Cut a tower indicator into columns, top each with spacers, stack them.

    Always numpy: this is block copying, and ``np.concatenate`` beats the
    compiled loop (see benchmarks/bench_kernels.py).
    """
    return stack_numpy(ind, spacers)


@njit(cache=True)
def _shifted_overlap_nb(a, b, m):
    n = a.shape[0]
    hits = 0
    lost = 0
    cut = max(n - m, 0)
    for c in range(cut):
        hits += a[c] & b[c + m]
    for c in range(cut, n):
        lost += a[c]
    return hits, lost


def shifted_overlap_numba(a, b, m):
    hits, lost = _shifted_overlap_nb(a, b, np.int64(m))
    return int(hits), int(lost)


def shifted_overlap_numpy(a, b, m):
    n = a.shape[0]
    if m >= n:
        return 0, int(np.count_nonzero(a))
    hits = int(np.count_nonzero(a[: n - m] & b[m:]))
    lost = int(np.count_nonzero(a[n - m:])) if m else 0
    return hits, lost


def shifted_overlap(a: np.ndarray, b: np.ndarray, m: int):
    """Count cells c with a[c] and b[c+m]; also the a-cells pushed off the end.

    Always numpy, for the same reason as :func:`stack`.
    """
    return shifted_overlap_numpy(a, b, m)
