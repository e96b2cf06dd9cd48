"""Brute-force reference computations, independent of the library code paths."""

import itertools
from fractions import Fraction

import numpy as np


def edge_list(g):
    return [(u, v, w) for u, v, w in g.edges()]


def naive_cut_vol(g, s):
    s = set(s)
    cut = 0
    vol = 0
    for u, v, w in edge_list(g):
        if (u in s) != (v in s):
            cut += w
        if u in s:
            vol += w
        if v in s:
            vol += w
    return cut, vol


def naive_conductance(g, s):
    cut, vol = naive_cut_vol(g, s)
    total = sum(2 * w for _, _, w in edge_list(g))
    den = min(vol, total - vol)
    if g.weighted:
        return cut / den
    return Fraction(int(cut), int(den))


def prefix_scan(g, x):
    """Minimum-conductance strict-subset prefix by recomputing every prefix from scratch."""
    deg = [sum(w for u, v, w in edge_list(g) if v_ in (u, v)) for v_ in range(g.n)]
    order = sorted(x, key=lambda v: (-x[v] / deg[v], v))
    best, best_phi = None, None
    total = sum(deg)
    for k in range(1, len(order) + 1):
        pre = order[:k]
        if len(pre) == g.n:
            break
        cut, vol = naive_cut_vol(g, pre)
        if min(vol, total - vol) == 0:
            continue
        phi = naive_conductance(g, pre)
        if best_phi is None or phi < best_phi:
            best, best_phi = sorted(pre), phi
    return best, best_phi


def dense_ppr(g, seeds, alpha):
    """Exact lazy-walk personalized PageRank by a dense linear solve."""
    n = g.n
    A = np.zeros((n, n))
    for u, v, w in edge_list(g):
        A[u, v] = A[v, u] = w
    d = A.sum(axis=1)
    W = 0.5 * (np.eye(n) + A / np.where(d > 0, d, 1)[:, None])
    s = np.zeros(n)
    s[list(seeds)] = 1.0 / len(seeds)
    # row-vector convention: p = alpha s + (1 - alpha) p W
    return np.linalg.solve((np.eye(n) - (1 - alpha) * W).T, alpha * s)


def brute_min_cut(n, arcs, s, t):
    """Minimum s-t cut by enumerating every source side."""
    others = [v for v in range(n) if v not in (s, t)]
    best = None
    for r in range(len(others) + 1):
        for sub in itertools.combinations(others, r):
            side = set(sub) | {s}
            c = sum(cap for u, v, cap in arcs if u in side and v not in side)
            if best is None or c < best:
                best = c
    return best


def brute_subset_min(g, members):
    """Minimum conductance over all nonempty subsets of ``members``."""
    best = None
    for r in range(1, len(members) + 1):
        for sub in itertools.combinations(members, r):
            phi = naive_conductance(g, sub)
            if best is None or phi < best:
                best = phi
    return best


def brute_subset_min_masks(g, members):
    """Same as brute_subset_min, vectorised over bitmasks of ``members`` (|members| <= 20)."""
    members = list(members)
    k = len(members)
    pos = {v: i for i, v in enumerate(members)}
    masks = np.arange(1, 2**k, dtype=np.int64)
    bits = ((masks[:, None] >> np.arange(k)) & 1).astype(np.int64)
    deg = np.array([g.degree(v) for v in members], dtype=np.int64)
    vol = bits @ deg
    inner = np.zeros(masks.shape[0], dtype=np.int64)
    for u, v, w in edge_list(g):
        if u in pos and v in pos:
            inner += bits[:, pos[u]] * bits[:, pos[v]] * int(w)
    cut = vol - 2 * inner
    den = np.minimum(vol, int(g.total_volume) - vol)
    ok = den > 0
    phi = np.full(masks.shape[0], np.inf)
    phi[ok] = cut[ok] / den[ok]
    i = int(np.argmin(phi))
    return Fraction(int(cut[i]), int(den[i]))


def brute_global_min(g):
    """Minimum conductance over all nonempty strict subsets, vectorised over bitmasks (n <= 20)."""
    n = g.n
    masks = np.arange(1, 2**n - 1, dtype=np.int64)
    bits = ((masks[:, None] >> np.arange(n)) & 1).astype(np.int64)
    deg = np.array([g.degree(v) for v in range(n)], dtype=np.int64)
    vol = bits @ deg
    cut = np.zeros(masks.shape[0], dtype=np.int64)
    for u, v, w in edge_list(g):
        cut += (bits[:, u] ^ bits[:, v]) * int(w)
    total = int(deg.sum())
    den = np.minimum(vol, total - vol)
    ok = den > 0
    phi = np.full(masks.shape[0], np.inf)
    phi[ok] = cut[ok] / den[ok]
    i = int(np.argmin(phi))
    return Fraction(int(cut[i]), int(den[i]))


def dense_l1reg_problem(g, seeds, alpha, rho):
    n = g.n
    A = np.zeros((n, n))
    for u, v, w in edge_list(g):
        A[u, v] = A[v, u] = w
    d = A.sum(axis=1)
    Dm = np.diag(1 / np.sqrt(d))
    Q = 0.5 * (1 + alpha) * np.eye(n) - 0.5 * (1 - alpha) * Dm @ A @ Dm
    s = np.zeros(n)
    s[list(seeds)] = 1.0 / len(seeds)
    b = alpha * s / np.sqrt(d)
    lam = rho * alpha * np.sqrt(d)
    return Q, b, lam


def l1reg_projected_gradient(g, seeds, alpha, rho, tol=1e-12, step=0.5):
    """Dense projected gradient on min 1/2 q'Qq - b'q + lam'q over q >= 0."""
    Q, b, lam = dense_l1reg_problem(g, seeds, alpha, rho)
    q = np.zeros(g.n)
    for _ in range(200000):
        nq = np.maximum(q - step * (Q @ q - b + lam), 0.0)
        if np.abs(nq - q).max() < tol:
            return nq
        q = nq
    return q


def l1reg_enumerate(g, seeds, alpha, rho):
    """Exact solution by trying every support and checking optimality (tiny n only)."""
    Q, b, lam = dense_l1reg_problem(g, seeds, alpha, rho)
    n = g.n
    for r in range(n + 1):
        for sup in itertools.combinations(range(n), r):
            q = np.zeros(n)
            if sup:
                idx = list(sup)
                q[idx] = np.linalg.solve(Q[np.ix_(idx, idx)], (b - lam)[idx])
                if np.any(q[idx] <= 0):
                    continue
            grad = Q @ q - b + lam
            if all(grad[v] >= -1e-13 for v in range(n) if v not in sup):
                return q
    raise AssertionError("no support satisfied the optimality conditions")
