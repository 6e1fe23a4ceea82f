"""Numba shortest-path kernels.

Dijkstra accumulates path sums in double-double arithmetic. The reported
distance is the exact sum of the optimal path's costs rounded once to double,
except when that sum lies within the double-double error (about 2^-104 relative
per edge) of a rounding tie. In particular it does not depend on the direction
in which the path is traversed outside those ties.
"""

import numpy as np
from numba import njit


@njit(inline="always")
def _less(ah, al, av, bh, bl, bv):
    if ah != bh:
        return ah < bh
    if al != bl:
        return al < bl
    return av < bv


@njit(inline="always")
def _sift_up(kh, kl, kv, i):
    while i > 0:
        p = (i - 1) >> 1
        if _less(kh[i], kl[i], kv[i], kh[p], kl[p], kv[p]):
            kh[i], kh[p] = kh[p], kh[i]
            kl[i], kl[p] = kl[p], kl[i]
            kv[i], kv[p] = kv[p], kv[i]
            i = p
        else:
            break


@njit(inline="always")
def _sift_down(kh, kl, kv, size):
    i = 0
    while True:
        a = 2 * i + 1
        if a >= size:
            break
        b = a + 1
        m = a
        if b < size and _less(kh[b], kl[b], kv[b], kh[a], kl[a], kv[a]):
            m = b
        if _less(kh[m], kl[m], kv[m], kh[i], kl[i], kv[i]):
            kh[i], kh[m] = kh[m], kh[i]
            kl[i], kl[m] = kl[m], kl[i]
            kv[i], kv[m] = kv[m], kv[i]
            i = m
        else:
            break


@njit(cache=True, nogil=True)
def dijkstra(indptr, nbr, eidx, costs, source, target, cutoff, vmask, use_mask):
    """Single-source costs from `source`.

    Stops early once `target` (>= 0) is settled; never settles vertices beyond
    `cutoff`. Ties between equal-cost predecessors go to the smaller id.
    Returns (dist, pred, settled_order); unreached vertices have dist = inf.
    """
    n = indptr.shape[0] - 1
    dh = np.full(n, np.inf)
    dl = np.zeros(n)
    pred = np.full(n, -1, dtype=np.int64)
    done = np.zeros(n, dtype=np.bool_)
    cap = 1024
    kh = np.empty(cap)
    kl = np.empty(cap)
    kv = np.empty(cap, dtype=np.int64)
    size = 0
    settled = np.empty(n, dtype=np.int64)
    ns = 0
    if use_mask and not vmask[source]:
        return dh, pred, settled[:0]
    dh[source] = 0.0
    kh[0] = 0.0
    kl[0] = 0.0
    kv[0] = source
    size = 1
    while size > 0:
        h = kh[0]
        l = kl[0]
        u = kv[0]
        size -= 1
        if size > 0:
            kh[0] = kh[size]
            kl[0] = kl[size]
            kv[0] = kv[size]
            _sift_down(kh, kl, kv, size)
        if done[u] or h != dh[u] or l != dl[u]:
            continue
        done[u] = True
        settled[ns] = u
        ns += 1
        if u == target:
            break
        for a in range(indptr[u], indptr[u + 1]):
            v = nbr[a]
            if done[v] or (use_mask and not vmask[v]):
                continue
            c = costs[eidx[a]]
            # two-sum of h + c, then fold in the low part
            s = h + c
            bb = s - h
            e = (h - (s - bb)) + (c - bb) + l
            nh = s + e
            nl = e - (nh - s)
            if nh > cutoff or (nh == cutoff and nl > 0.0):
                continue
            if nh < dh[v] or (nh == dh[v] and nl < dl[v]):
                dh[v] = nh
                dl[v] = nl
                pred[v] = u
                if size == kh.shape[0]:
                    kh2 = np.empty(2 * size)
                    kl2 = np.empty(2 * size)
                    kv2 = np.empty(2 * size, dtype=np.int64)
                    kh2[:size] = kh
                    kl2[:size] = kl
                    kv2[:size] = kv
                    kh = kh2
                    kl = kl2
                    kv = kv2
                kh[size] = nh
                kl[size] = nl
                kv[size] = v
                size += 1
                _sift_up(kh, kl, kv, size - 1)
            elif nh == dh[v] and nl == dl[v] and u < pred[v]:
                pred[v] = u
    # anything left unsettled was only tentatively reached
    for v in range(n):
        if not done[v]:
            dh[v] = np.inf
            pred[v] = -1
    return dh, pred, settled[:ns]


@njit(cache=True, nogil=True)
def bfs(indptr, nbr, source, vmask, use_mask):
    """Hop distances from source (-1 when unreachable) and BFS-tree predecessors."""
    n = indptr.shape[0] - 1
    hops = np.full(n, -1, dtype=np.int64)
    pred = np.full(n, -1, dtype=np.int64)
    if use_mask and not vmask[source]:
        return hops, pred
    queue = np.empty(n, dtype=np.int64)
    head = 0
    tail = 0
    hops[source] = 0
    queue[tail] = source
    tail += 1
    while head < tail:
        u = queue[head]
        head += 1
        for a in range(indptr[u], indptr[u + 1]):
            v = nbr[a]
            if hops[v] >= 0 or (use_mask and not vmask[v]):
                continue
            hops[v] = hops[u] + 1
            pred[v] = u
            queue[tail] = v
            tail += 1
    return hops, pred


@njit(cache=True, nogil=True)
def tree_hops(pred, order):
    """Number of edges on each tree path, given vertices in settling order."""
    n = pred.shape[0]
    out = np.full(n, -1, dtype=np.int64)
    for i in range(order.shape[0]):
        v = order[i]
        p = pred[v]
        out[v] = 0 if p < 0 else out[p] + 1
    return out
