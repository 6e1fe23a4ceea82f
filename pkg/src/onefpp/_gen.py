"""Numba kernels for edge sampling."""

import math

import numpy as np
from numba import njit

from ._rng import SALT_EDGE, SALT_STREAM, key2, pair_uniform, stream_next


@njit(inline="always")
def kernel_prob(dist2, ww, d, alpha, c, cprime, alpha_inf):
    if dist2 == 0.0:
        return c
    if d == 2:
        rd = dist2
    elif d == 1:
        rd = math.sqrt(dist2)
    else:
        rd = dist2 ** (0.5 * d)
    ratio = ww / rd
    if alpha_inf:
        return c if ratio >= cprime else 0.0
    if ratio >= 1.0:
        return c
    return c * ratio**alpha


@njit(inline="always")
def _dist2(pos, i, j, torus, period):
    s = 0.0
    for k in range(pos.shape[1]):
        dx = abs(pos[i, k] - pos[j, k])
        if torus and dx > 0.5 * period:
            dx = period - dx
        s += dx * dx
    return s


@njit(inline="always")
def _push(eu, ev, count, a, b):
    if count == eu.shape[0]:
        nu = np.empty(2 * eu.shape[0], dtype=np.int64)
        nv = np.empty(2 * eu.shape[0], dtype=np.int64)
        nu[:count] = eu
        nv[:count] = ev
        eu = nu
        ev = nv
    eu[count] = a
    ev[count] = b
    return eu, ev, count + 1


@njit(cache=True, nogil=True)
def naive_edges(pos, w, seed, alpha, c, cprime, alpha_inf, torus, period):
    """Every unordered pair gets its own uniform U_uv; the edge is present iff U_uv < h."""
    n = pos.shape[0]
    d = pos.shape[1]
    eu = np.empty(max(16, 4 * n), dtype=np.int64)
    ev = np.empty(max(16, 4 * n), dtype=np.int64)
    count = 0
    for i in range(n):
        for j in range(i + 1, n):
            p = kernel_prob(_dist2(pos, i, j, torus, period), w[i] * w[j], d, alpha, c, cprime, alpha_inf)
            if p > 0.0 and pair_uniform(seed, SALT_EDGE, i, j) < p:
                eu, ev, count = _push(eu, ev, count, i, j)
    return eu[:count], ev[:count]


@njit(inline="always")
def _box_count(sat, strides, d, lo, hi):
    # inclusion-exclusion over the 2^d corners of the summed-area table
    total = 0
    for mask in range(1 << d):
        idx = 0
        sign = 1
        for k in range(d):
            if (mask >> k) & 1:
                idx += lo[k] * strides[k]
                sign = -sign
            else:
                idx += (hi[k] + 1) * strides[k]
        total += sign * sat[idx]
    return total


@njit(inline="always")
def _clip_box(cu, m, G, lo, hi):
    for k in range(cu.shape[0]):
        lo[k] = max(cu[k] - m, 0)
        hi[k] = min(cu[k] + m, G[k] - 1)


@njit(inline="always")
def _in_box(cc, v, lo, hi):
    for k in range(lo.shape[0]):
        if cc[v, k] < lo[k] or cc[v, k] > hi[k]:
            return False
    return True


@njit(cache=True, nogil=True)
def _collect_box(j, lo, hi, G, cc, order, layer_ptr, cell_start, ncells1, out):
    """Layer-j vertices in the cell box [lo, hi], in (cell, id) order. Returns count."""
    d = lo.shape[0]
    nj = layer_ptr[j + 1] - layer_ptr[j]
    rows = 1
    for k in range(d - 1):
        rows *= hi[k] - lo[k] + 1
    cnt = 0
    if rows > nj:
        for idx in range(layer_ptr[j], layer_ptr[j + 1]):
            v = order[idx]
            if _in_box(cc, v, lo, hi):
                out[cnt] = v
                cnt += 1
        return cnt
    cur = lo.copy()
    base = j * ncells1
    while True:
        f0 = 0
        for k in range(d):
            f0 = f0 * G[k] + cur[k]
        f1 = f0 + (hi[d - 1] - lo[d - 1])
        for idx in range(cell_start[base + f0], cell_start[base + f1 + 1]):
            out[cnt] = order[idx]
            cnt += 1
        # odometer over the first d-1 coordinates
        k = d - 2
        while k >= 0:
            cur[k] += 1
            if cur[k] <= hi[k]:
                break
            cur[k] = lo[k]
            k -= 1
        if k < 0:
            break
    return cnt


@njit(cache=True, nogil=True)
def _ranks_to_vertices(j, lo, hi, G, order, cell_start, ncells1, sat_j, strides, ranks, nr, out):
    """Map sorted ranks within the cell box [lo, hi] to layer-j vertex ids.

    Ranks follow the same (cell, id) order as _collect_box. The row holding each rank
    is found by bisection on summed-area counts, one coordinate at a time.
    """
    d = lo.shape[0]
    a = lo.copy()
    b = hi.copy()
    base = j * ncells1
    for t in range(nr):
        r = ranks[t]
        for k in range(d):
            a[k] = lo[k]
            b[k] = hi[k]
        for k in range(d - 1):
            # smallest x with count(a[k]..x) > r
            x0 = lo[k]
            x1 = hi[k]
            while x0 < x1:
                mid = (x0 + x1) // 2
                b[k] = mid
                if _box_count(sat_j, strides, d, a, b) > r:
                    x1 = mid
                else:
                    x0 = mid + 1
            if x0 > lo[k]:
                b[k] = x0 - 1
                r -= _box_count(sat_j, strides, d, a, b)
            a[k] = x0
            b[k] = x0
        f0 = 0
        for k in range(d):
            f0 = f0 * G[k] + a[k]
        out[t] = order[cell_start[base + f0] + r]


@njit(cache=True, nogil=True)
def cell_edges(pos, w, cc, layer, order, layer_ptr, cell_start, sat, G, cell_side,
               wmax, seed, alpha, c, cprime, alpha_inf, near_factor, tail_mass):
    """Exact edge sampling with weight layers and dyadic shells.

    Each unordered pair is examined from its lower-layer endpoint (smaller id on ties).
    Near the source every candidate gets an exact Bernoulli(h) from the pair hash. In
    the shell between cell boxes of radius m and 2m the kernel is bounded by pbar, so
    candidates are drawn at rate pbar by geometric skipping over ranks and kept with
    probability h / pbar.
    """
    n = pos.shape[0]
    d = pos.shape[1]
    nlayers = layer_ptr.shape[0] - 1
    ncells1 = 1
    for k in range(d):
        ncells1 *= G[k]
    ncells1 += 1
    strides = np.empty(d, dtype=np.int64)
    sz = 1
    for k in range(d - 1, -1, -1):
        strides[k] = sz
        sz *= G[k] + 1
    nsat = sz

    eu = np.empty(max(16, 8 * n), dtype=np.int64)
    ev = np.empty(max(16, 8 * n), dtype=np.int64)
    count = 0
    buf = np.empty(n, dtype=np.int64)
    ranks = np.empty(64, dtype=np.int64)
    lo = np.empty(d, dtype=np.int64)
    hi = np.empty(d, dtype=np.int64)
    lo2 = np.empty(d, dtype=np.int64)
    hi2 = np.empty(d, dtype=np.int64)
    cu = np.empty(d, dtype=np.int64)

    for u in range(n):
        lu = layer[u]
        for k in range(d):
            cu[k] = cc[u, k]
        maxext = 0
        for k in range(d):
            maxext = max(maxext, cu[k], G[k] - 1 - cu[k])
        for j in range(lu, nlayers):
            if layer_ptr[j + 1] == layer_ptr[j]:
                continue
            ww = w[u] * wmax[j]
            if alpha_inf:
                a0 = (ww / cprime) ** (1.0 / d)
            else:
                a0 = ww ** (1.0 / d)
            m0 = int(math.ceil(near_factor * a0 / cell_side))
            if m0 < 1:
                m0 = 1
            if m0 > maxext:
                m0 = maxext

            # near field: exact Bernoulli per pair
            _clip_box(cu, m0, G, lo, hi)
            cnt = _collect_box(j, lo, hi, G, cc, order, layer_ptr, cell_start, ncells1, buf)
            for t in range(cnt):
                v = buf[t]
                if j == lu and v <= u:
                    continue
                p = kernel_prob(_dist2(pos, u, v, False, 0.0), w[u] * w[v], d, alpha, c, cprime, alpha_inf)
                if p > 0.0 and pair_uniform(seed, SALT_EDGE, u, v) < p:
                    eu, ev, count = _push(eu, ev, count, min(u, v), max(u, v))

            # far field: dyadic shells with rejection
            if m0 >= maxext:
                continue
            state = key2(seed, SALT_STREAM, u, j)
            m_in = m0
            n_inner = _box_count(sat[j * nsat:(j + 1) * nsat], strides, d, lo, hi)
            while m_in < maxext:
                rho = m_in * cell_side
                rd = rho**d
                if alpha_inf:
                    pbar = c if ww / rd >= cprime else 0.0
                else:
                    ratio = ww / rd
                    pbar = c if ratio >= 1.0 else c * ratio**alpha
                if pbar <= 0.0:
                    break
                sat_j = sat[j * nsat:(j + 1) * nsat]
                # once few candidates remain, one last shell covers everything left
                nj = layer_ptr[j + 1] - layer_ptr[j]
                if pbar * (nj - n_inner) <= tail_mass:
                    m_out = maxext
                else:
                    m_out = min(max(2 * m_in, m_in + 1), maxext)
                _clip_box(cu, m_out, G, lo2, hi2)
                ntot = _box_count(sat_j, strides, d, lo2, hi2)
                # Bernoulli(pbar) over ranks 0..ntot-1 by geometric skipping
                nr = 0
                if ntot > 0:
                    if pbar >= 1.0:
                        r = 0
                        while r < ntot:
                            if nr == ranks.shape[0]:
                                nrk = np.empty(2 * nr, dtype=np.int64)
                                nrk[:nr] = ranks
                                ranks = nrk
                            ranks[nr] = r
                            nr += 1
                            r += 1
                    else:
                        logq = math.log1p(-pbar)
                        r = -1
                        while True:
                            state, uu = stream_next(state)
                            r += 1 + int(math.floor(math.log1p(-uu) / logq))
                            if r >= ntot or r < 0:
                                break
                            if nr == ranks.shape[0]:
                                nrk = np.empty(2 * nr, dtype=np.int64)
                                nrk[:nr] = ranks
                                ranks = nrk
                            ranks[nr] = r
                            nr += 1
                if nr > 0:
                    _ranks_to_vertices(j, lo2, hi2, G, order, cell_start, ncells1, sat_j, strides, ranks, nr, buf)
                    for t in range(nr):
                        v = buf[t]
                        state, ua = stream_next(state)
                        inner = True
                        for k in range(d):
                            if abs(cc[v, k] - cu[k]) > m_in:
                                inner = False
                                break
                        if inner or (j == lu and v <= u):
                            continue
                        p = kernel_prob(_dist2(pos, u, v, False, 0.0), w[u] * w[v], d, alpha, c, cprime, alpha_inf)
                        if ua * pbar < p:
                            eu, ev, count = _push(eu, ev, count, min(u, v), max(u, v))
                m_in = m_out
                n_inner = ntot
    return eu[:count], ev[:count]
