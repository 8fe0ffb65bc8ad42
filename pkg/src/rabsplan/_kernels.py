"""Hot inner loops: simplex pivoting, hop-bounded DFS, exhaustive RB allocation.

Each kernel has a numba implementation and a numpy/pure-Python fallback.
The fallback is used when numba is missing or when the environment variable
``RABSPLAN_DISABLE_NUMBA`` is set to a truthy value at import time. Both
paths implement the same pivot rule and visit order, so results agree.
"""

from __future__ import annotations

import os

import numpy as np

_FLAG = os.environ.get("RABSPLAN_DISABLE_NUMBA", "").strip().lower()
_DISABLED = _FLAG not in ("", "0", "false", "no")

try:
    if _DISABLED:
        raise ImportError
    from numba import njit
    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not _DISABLED
BACKEND = "numba" if USE_NUMBA else "numpy"

STATUS_OPTIMAL = 0
STATUS_UNBOUNDED = 1
STATUS_ITERATION_LIMIT = 2

# Relative tolerance for treating two ratio-test values as tied.
RATIO_TIE_TOL = 1e-12
# Consecutive degenerate pivots after which pricing switches to Bland's rule.
DEGENERATE_STREAK = 25


# ---------------------------------------------------------------------------
# Simplex (tableau form, maximisation)
#
# Layout: T has m constraint rows plus an objective row at index m; the last
# column is the right-hand side. Column j may enter when T[m, j] < -tol and
# j < n_enter. basis[i] is the column basic in row i.
#
# Pricing is Dantzig's rule (most negative reduced cost, lowest index on
# ties). During a run of DEGENERATE_STREAK degenerate pivots it falls back
# to Bland's rule until the next non-degenerate pivot: every Bland streak is
# finite and every non-degenerate pivot strictly improves the objective, so
# the method cannot cycle. The leaving row is the lowest basis index among
# tied ratios.
# ---------------------------------------------------------------------------

def _simplex_numpy(T, basis, n_enter, max_iter, tol):
    m = T.shape[0] - 1
    obj = T[m]
    rhs = T[:m, -1]
    streak = 0
    for it in range(max_iter):
        reduced = obj[:n_enter]
        cand = np.flatnonzero(reduced < -tol)
        if cand.size == 0:
            return STATUS_OPTIMAL, it
        col = cand[0] if streak >= DEGENERATE_STREAK else cand[np.argmin(reduced[cand])]
        column = T[:m, col]
        pos = np.flatnonzero(column > tol)
        if pos.size == 0:
            return STATUS_UNBOUNDED, it
        ratios = rhs[pos] / column[pos]
        best = ratios.min()
        streak = streak + 1 if best <= tol else 0
        ties = pos[ratios <= best + RATIO_TIE_TOL * (1.0 + abs(best))]
        row = ties[np.argmin(basis[ties])]
        T[row] /= T[row, col]
        factors = T[:, col].copy()
        factors[row] = 0.0
        T -= np.outer(factors, T[row])
        T[:, col] = 0.0
        T[row, col] = 1.0
        basis[row] = col
    return STATUS_ITERATION_LIMIT, max_iter


def _simplex_loops(T, basis, n_enter, max_iter, tol):
    m = T.shape[0] - 1
    ncol = T.shape[1]
    streak = 0
    for it in range(max_iter):
        col = -1
        if streak >= DEGENERATE_STREAK:
            for j in range(n_enter):
                if T[m, j] < -tol:
                    col = j
                    break
        else:
            low = -tol
            for j in range(n_enter):
                if T[m, j] < low:
                    low = T[m, j]
                    col = j
        if col < 0:
            return STATUS_OPTIMAL, it
        best = np.inf
        for i in range(m):
            if T[i, col] > tol:
                r = T[i, ncol - 1] / T[i, col]
                if r < best:
                    best = r
        if best == np.inf:
            return STATUS_UNBOUNDED, it
        streak = streak + 1 if best <= tol else 0
        row = -1
        limit = best + RATIO_TIE_TOL * (1.0 + abs(best))
        for i in range(m):
            if T[i, col] > tol:
                r = T[i, ncol - 1] / T[i, col]
                if r <= limit and (row < 0 or basis[i] < basis[row]):
                    row = i
        piv = T[row, col]
        for j in range(ncol):
            T[row, j] /= piv
        for i in range(m + 1):
            if i != row:
                f = T[i, col]
                if f != 0.0:
                    for j in range(ncol):
                        T[i, j] -= f * T[row, j]
                    T[i, col] = 0.0
        T[row, col] = 1.0
        basis[row] = col
    return STATUS_ITERATION_LIMIT, max_iter


# ---------------------------------------------------------------------------
# Hop-bounded simple paths to the macro BS (node id == mbs).
# Neighbours are visited in ascending id order and the macro BS has the
# largest id, so routes come out in lexicographic node-sequence order.
# ---------------------------------------------------------------------------

def _dfs_routes(indptr, indices, mbs, max_hops, max_routes, out, fill):
    n_nodes = indptr.shape[0] - 1
    path = np.empty(max_hops + 1, np.int64)
    ptr = np.empty(max_hops + 1, np.int64)
    on_path = np.zeros(n_nodes, np.bool_)
    count = 0
    for s in range(mbs):
        depth = 0
        path[0] = s
        ptr[0] = indptr[s]
        on_path[s] = True
        while depth >= 0:
            node = path[depth]
            if ptr[depth] < indptr[node + 1]:
                nb = indices[ptr[depth]]
                ptr[depth] += 1
                if on_path[nb]:
                    continue
                if nb == mbs:
                    if count >= max_routes:
                        return -1
                    if fill:
                        for k in range(depth + 1):
                            out[count, k] = path[k]
                        out[count, depth + 1] = mbs
                        for k in range(depth + 2, max_hops + 1):
                            out[count, k] = -1
                    count += 1
                elif depth + 1 < max_hops:
                    depth += 1
                    path[depth] = nb
                    ptr[depth] = indptr[nb]
                    on_path[nb] = True
            else:
                on_path[node] = False
                depth -= 1
    return count


# ---------------------------------------------------------------------------
# Exhaustive integer RB allocation for a fixed deployment.
#
# incidence[v, p] = 1 when route p loads resource v (edge or access cell).
# Allocation a[v] RBs gives capacity a[v] * rates[v]. The first nv-1
# resources are enumerated with caps (cap < 0 = unbounded) and the last one
# (an edge, hence uncapped) absorbs the rest so every allocation spends
# exactly K. Returns (best value, best allocation, allocations visited).
# ---------------------------------------------------------------------------

def _flow_value(incidence, rhs, tol, max_iter):
    m, n = incidence.shape
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = incidence
    for i in range(m):
        T[i, n + i] = 1.0
        T[i, n + m] = rhs[i]
    for j in range(n):
        T[m, j] = -1.0
    basis = np.arange(n, n + m)
    status, _ = simplex_iterate(T, basis, n + m, max_iter, tol)
    if status != STATUS_OPTIMAL:
        return -1.0
    return T[m, n + m]


def _best_allocation(incidence, rates, caps, K, tol, max_iter, rel_tol):
    nv = rates.shape[0]
    a = np.zeros(nv, np.int64)
    best_alloc = np.zeros(nv, np.int64)
    best = -1.0
    visited = 0
    rhs = np.zeros(nv)
    s = 0
    while True:
        a[nv - 1] = K - s
        for v in range(nv):
            rhs[v] = a[v] * rates[v]
        value = flow_value(incidence, rhs, tol, max_iter)
        visited += 1
        if value < 0.0:
            return -1.0, best_alloc, visited
        if value > best + rel_tol * max(1.0, abs(best)):
            best = value
            for v in range(nv):
                best_alloc[v] = a[v]
        # Odometer step over the first nv-1 resources, keeping the sum <= K.
        i = nv - 2
        while i >= 0:
            if s < K and (caps[i] < 0 or a[i] < caps[i]):
                a[i] += 1
                s += 1
                break
            s -= a[i]
            a[i] = 0
            i -= 1
        if i < 0:
            break
    return best, best_alloc, visited


# Order matters: each compiled kernel resolves its callees from module globals.
if USE_NUMBA:
    simplex_iterate = njit(cache=True)(_simplex_loops)
    flow_value = njit(cache=True)(_flow_value)
    _best_allocation_impl = njit(cache=True)(_best_allocation)
    _dfs_impl = njit(cache=True)(_dfs_routes)
else:
    simplex_iterate = _simplex_numpy
    flow_value = _flow_value
    _best_allocation_impl = _best_allocation
    _dfs_impl = _dfs_routes


def enumerate_paths(indptr, indices, mbs, max_hops, max_routes):
    """All simple paths of at most ``max_hops`` edges from every site to ``mbs``.

    Returns an ``(n_routes, max_hops + 1)`` int64 array padded with -1, or
    ``None`` when the count would exceed ``max_routes``.
    """
    indptr = np.ascontiguousarray(indptr, dtype=np.int64)
    indices = np.ascontiguousarray(indices, dtype=np.int64)
    scratch = np.empty((0, max_hops + 1), np.int64)
    count = _dfs_impl(indptr, indices, mbs, max_hops, max_routes, scratch, False)
    if count < 0:
        return None
    out = np.empty((count, max_hops + 1), np.int64)
    _dfs_impl(indptr, indices, mbs, max_hops, max_routes, out, True)
    return out


def best_allocation(incidence, rates, caps, K, tol=1e-9, max_iter=10_000, rel_tol=1e-9):
    incidence = np.ascontiguousarray(incidence, dtype=np.float64)
    rates = np.ascontiguousarray(rates, dtype=np.float64)
    caps = np.ascontiguousarray(caps, dtype=np.int64)
    return _best_allocation_impl(incidence, rates, caps, int(K), tol, max_iter, rel_tol)
