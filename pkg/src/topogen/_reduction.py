"""Z/2 boundary-matrix column reduction kernel.

The kernel is plain Python over flat int arrays so that it can be compiled
with numba; ``reduce_boundary_py`` is the same function uncompiled.
"""

import numpy as np

try:
    from numba import njit
    from numba.extending import register_jitable
except ImportError:  # pragma: no cover
    njit = None

    def register_jitable(fn):
        return fn


@register_jitable
def _xor_sorted(a, na, b, nb, out):
    # symmetric difference of two strictly increasing arrays
    i = 0
    j = 0
    k = 0
    while i < na and j < nb:
        x = a[i]
        y = b[j]
        if x < y:
            out[k] = x
            i += 1
            k += 1
        elif y < x:
            out[k] = y
            j += 1
            k += 1
        else:
            i += 1
            j += 1
    while i < na:
        out[k] = a[i]
        i += 1
        k += 1
    while j < nb:
        out[k] = b[j]
        j += 1
        k += 1
    return k


def _reduce(indptr, indices, nrows):
    """Left-to-right column reduction.

    Column ``j`` holds rows ``indices[indptr[j]:indptr[j+1]]`` in increasing
    order, all below ``nrows``. Returns ``(low, additions)`` where ``low[j]``
    is the pivot row of reduced column ``j`` or -1 if it reduced to zero.
    """
    ncols = len(indptr) - 1
    low = np.full(ncols, -1, dtype=np.int64)
    pivot_owner = np.full(nrows, -1, dtype=np.int64)
    # reduced copies of pivot columns, packed
    store_start = np.zeros(ncols, dtype=np.int64)
    store_len = np.zeros(ncols, dtype=np.int64)
    cap = max(16, 4 * len(indices))
    store = np.empty(cap, dtype=np.int64)
    used = 0

    maxlen = 4
    for j in range(ncols):
        w = indptr[j + 1] - indptr[j]
        if w > maxlen:
            maxlen = w
    bufsize = maxlen
    work = np.empty(bufsize, dtype=np.int64)
    spare = np.empty(bufsize, dtype=np.int64)
    additions = 0

    for j in range(ncols):
        s = indptr[j]
        n = indptr[j + 1] - s
        for t in range(n):
            work[t] = indices[s + t]
        while n > 0:
            k = pivot_owner[work[n - 1]]
            if k < 0:
                break
            m = store_len[k]
            if n + m > bufsize:
                bufsize = 2 * (n + m)
                grown = np.empty(bufsize, dtype=np.int64)
                grown[:n] = work[:n]
                work = grown
                spare = np.empty(bufsize, dtype=np.int64)
            ks = store_start[k]
            n = _xor_sorted(work, n, store[ks:ks + m], m, spare)
            work, spare = spare, work
            additions += 1
        if n > 0:
            r = work[n - 1]
            low[j] = r
            pivot_owner[r] = j
            if used + n > cap:
                cap = 2 * (used + n)
                grown = np.empty(cap, dtype=np.int64)
                grown[:used] = store[:used]
                store = grown
            store[used:used + n] = work[:n]
            store_start[j] = used
            store_len[j] = n
            used += n
    return low, additions


def reduce_boundary_py(indptr, indices, nrows=None):
    indptr = np.asarray(indptr, np.int64)
    nrows = len(indptr) - 1 if nrows is None else nrows
    return _reduce(indptr, np.asarray(indices, np.int64), nrows)


if njit is not None:
    _reduce_jit = njit(cache=True)(_reduce)

    def reduce_boundary(indptr, indices, nrows=None):
        indptr = np.ascontiguousarray(indptr, np.int64)
        nrows = len(indptr) - 1 if nrows is None else nrows
        return _reduce_jit(indptr, np.ascontiguousarray(indices, np.int64), nrows)
else:  # pragma: no cover
    reduce_boundary = reduce_boundary_py
