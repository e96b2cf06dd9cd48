"""Compiled inner loops shared by the graph and diffusion modules.

Every kernel that touches per-vertex state takes a caller-owned ``pos``
scratch array (all ``-1`` on entry) and restores it before returning, so a
call only ever writes to the entries it visits.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def build_csr(n, a, b, w, neighbors, weights, offsets):
    # (a, b) pairs are deduplicated, a < b, sorted by (a, b); each row comes out sorted
    cursor = offsets[:-1].copy()
    for k in range(a.shape[0]):
        u = a[k]
        v = b[k]
        neighbors[cursor[u]] = v
        weights[cursor[u]] = w[k]
        cursor[u] += 1
        neighbors[cursor[v]] = u
        weights[cursor[v]] = w[k]
        cursor[v] += 1


@njit(cache=True)
def row_sums(offsets, weights):
    n = offsets.shape[0] - 1
    out = np.zeros(n)
    for v in range(n):
        acc = 0.0
        for e in range(offsets[v], offsets[v + 1]):
            acc += weights[e]
        out[v] = acc
    return out


def _grow(arr, size):
    out = np.empty(size, arr.dtype)
    out[: arr.shape[0]] = arr
    return out


_grow = njit(cache=True)(_grow)


@njit(cache=True, nogil=True)
def acl_push(offsets, neighbors, weights, degrees, seeds, seed_mass, alpha, eps, pos):
    """FIFO lazy-walk push. Returns local vertex ids, p, r, push count and work."""
    cap = max(16, 2 * seeds.shape[0])
    verts = np.empty(cap, np.int64)
    p = np.zeros(cap)
    r = np.zeros(cap)
    inq = np.zeros(cap, np.bool_)
    queue = np.empty(cap, np.int64)
    qhead = 0
    qtail = 0
    nloc = 0
    for i in range(seeds.shape[0]):
        s = seeds[i]
        verts[nloc] = s
        r[nloc] = seed_mass[i]
        pos[s] = nloc
        nloc += 1
    for i in range(nloc):
        if r[i] >= eps * degrees[verts[i]]:
            queue[qtail] = i
            qtail += 1
            inq[i] = True

    pushes = 0
    work = 0.0
    half = (1.0 - alpha) / 2.0
    while qhead < qtail:
        i = queue[qhead % cap]
        qhead += 1
        inq[i] = False
        v = verts[i]
        dv = degrees[v]
        rv = r[i]
        p[i] += alpha * rv
        r[i] = half * rv
        share = half * rv / dv
        pushes += 1
        work += dv
        for e in range(offsets[v], offsets[v + 1]):
            u = neighbors[e]
            j = pos[u]
            if j < 0:
                if nloc == verts.shape[0]:
                    # queue is a ring over local slots; unroll before resizing
                    size = 2 * nloc
                    length = qtail - qhead
                    q2 = np.empty(size, np.int64)
                    for t in range(length):
                        q2[t] = queue[(qhead + t) % cap]
                    queue = q2
                    qhead = 0
                    qtail = length
                    verts = _grow(verts, size)
                    p2 = np.zeros(size)
                    p2[:nloc] = p[:nloc]
                    p = p2
                    r2 = np.zeros(size)
                    r2[:nloc] = r[:nloc]
                    r = r2
                    inq = _grow(inq, size)
                    inq[nloc:] = False
                    cap = size
                j = nloc
                verts[j] = u
                pos[u] = j
                nloc += 1
            r[j] += share * weights[e]
            if not inq[j] and r[j] >= eps * degrees[u]:
                queue[qtail % cap] = j
                qtail += 1
                inq[j] = True
        if not inq[i] and r[i] >= eps * dv:
            queue[qtail % cap] = i
            qtail += 1
            inq[i] = True

    for i in range(nloc):
        pos[verts[i]] = -1
    return verts[:nloc].copy(), p[:nloc].copy(), r[:nloc].copy(), pushes, work


@njit(cache=True, nogil=True)
def prefix_cuts(offsets, neighbors, weights, degrees, order, pos):
    """Cut and volume of every prefix of ``order``."""
    k = order.shape[0]
    cuts = np.empty(k)
    vols = np.empty(k)
    cut = 0.0
    vol = 0.0
    for i in range(k):
        v = order[i]
        inside = 0.0
        for e in range(offsets[v], offsets[v + 1]):
            if pos[neighbors[e]] >= 0:
                inside += weights[e]
        pos[v] = i
        vol += degrees[v]
        cut += degrees[v] - 2.0 * inside
        cuts[i] = cut
        vols[i] = vol
    for i in range(k):
        pos[order[i]] = -1
    return cuts, vols
