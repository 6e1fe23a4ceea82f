"""Numba kernels for cluster labelling and per-box graph statistics."""

import numpy as np
from numba import njit


@njit(inline="always")
def _find(parent, i):
    while parent[i] != i:
        parent[i] = parent[parent[i]]
        i = parent[i]
    return i


@njit(cache=True, nogil=True)
def lattice_labels(d, side, open_bonds):
    """Union-find over open bonds; each site gets the smallest site id of its cluster.

    open_bonds[k, i] is the bond from site i to i + e_k (C order, last axis fastest).
    """
    n = open_bonds.shape[1]
    parent = np.arange(n)
    stride = 1
    for k in range(d - 1, -1, -1):
        for i in range(n):
            if not open_bonds[k, i]:
                continue
            if (i // stride) % side == side - 1:
                continue
            a = _find(parent, i)
            b = _find(parent, i + stride)
            if a < b:
                parent[b] = a
            elif b < a:
                parent[a] = b
        stride *= side
    out = np.empty(n, dtype=np.int64)
    for i in range(n):
        out[i] = _find(parent, i)
    return out


@njit(cache=True, nogil=True)
def box_stats(box, members, ptr, indptr, nbr):
    """Vertex count, connectivity and hop diameter of the graph induced on each box.

    box[v] is the box of vertex v (-1 when outside every box); members lists the
    vertices box by box with offsets ptr. Diameter is -1 for empty or disconnected boxes.
    """
    nb = ptr.shape[0] - 1
    count = np.zeros(nb, dtype=np.int64)
    connected = np.zeros(nb, dtype=np.bool_)
    diam = np.full(nb, -1, dtype=np.int64)
    n = box.shape[0]
    hops = np.full(n, -1, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    for b in range(nb):
        lo = ptr[b]
        hi = ptr[b + 1]
        count[b] = hi - lo
        if hi == lo:
            continue
        best = 0
        ok = True
        for s in range(lo, hi):
            src = members[s]
            for t in range(lo, hi):
                hops[members[t]] = -1
            hops[src] = 0
            head = 0
            tail = 1
            queue[0] = src
            while head < tail:
                u = queue[head]
                head += 1
                for a in range(indptr[u], indptr[u + 1]):
                    v = nbr[a]
                    if box[v] != b or hops[v] >= 0:
                        continue
                    hops[v] = hops[u] + 1
                    if hops[v] > best:
                        best = hops[v]
                    queue[tail] = v
                    tail += 1
            if tail < hi - lo:
                ok = False
                break
        connected[b] = ok
        if ok:
            diam[b] = best
        for t in range(lo, hi):
            hops[members[t]] = -1
    return count, connected, diam
