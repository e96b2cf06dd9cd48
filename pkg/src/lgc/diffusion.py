"""Spectral diffusions: approximate PageRank push, PageRank Nibble and
l1-regularized PageRank.

All three only ever touch the seeds and the region their mass reaches, so
their cost tracks the output rather than the graph.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from lgc import _kernels
from lgc.graph import DomainError, cluster_from_set, sweep_cut, validate_seeds


class ConvergenceError(RuntimeError):
    """The l1-regularized solver ran out of iterations.

    ``best`` holds the iterate with the smallest KKT residual and
    ``residual`` that residual.
    """

    def __init__(self, message, best, residual):
        super().__init__(message)
        self.best = best
        self.residual = residual


@dataclass(frozen=True)
class DiffusionParams:
    alpha: float = 0.15
    eps: float = 1e-6
    rho: float = 1e-5
    max_iters: int = 10000
    kkt_tol: float = 1e-6

    def __post_init__(self):
        for name in ("alpha", "eps", "rho", "kkt_tol"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not self.eps > 0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        if not self.rho > 0:
            raise ValueError(f"rho must be positive, got {self.rho}")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if not self.kkt_tol > 0:
            raise ValueError("kkt_tol must be positive")


class SparseEmbedding(dict):
    """vertex -> positive value; zero entries are never stored."""

    def __init__(self, items=()):
        super().__init__()
        pairs = items.items() if isinstance(items, dict) else items
        for v, x in pairs:
            if x < 0:
                raise ValueError(f"negative entry at vertex {v}")
            if x > 0:
                self[int(v)] = float(x)

    @classmethod
    def from_arrays(cls, verts, vals):
        keep = vals > 0
        return cls(zip(verts[keep].tolist(), vals[keep].tolist()))

    @property
    def support(self):
        return frozenset(self)

    def l1(self):
        return math.fsum(self.values())

    def to_json(self):
        return json.dumps({str(v): x for v, x in sorted(self.items())})

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["vertex", "value"])
        for v, x in sorted(self.items()):
            w.writerow([v, repr(x)])
        return buf.getvalue()


@dataclass
class PushResult:
    p: SparseEmbedding
    r: SparseEmbedding
    pushes: int
    work: float


def _seed_mass(g, seeds, seed_weighting):
    if seed_weighting == "uniform":
        return np.full(seeds.shape[0], 1.0 / seeds.shape[0])
    if seed_weighting == "degree":
        d = g.degrees[seeds]
        return d / d.sum()
    raise ValueError(f"unknown seed weighting {seed_weighting!r}")


def approximate_pagerank(g, seeds, params=None, seed_weighting="uniform"):
    """Lazy-walk personalized PageRank by FIFO push.

    On return every residual satisfies ``r(v) < eps * deg(v)`` and the
    pushed degree total is at most ``1 / (eps * alpha)``.
    """
    params = params or DiffusionParams()
    seeds = validate_seeds(g, seeds)
    mass = _seed_mass(g, seeds, seed_weighting)
    verts, p, r, pushes, work = _kernels.acl_push(
        g.offsets, g.neighbors, g.weights, g.degrees, seeds, mass, params.alpha, params.eps, g.scratch()
    )
    return PushResult(SparseEmbedding.from_arrays(verts, p), SparseEmbedding.from_arrays(verts, r), int(pushes), float(work))


def pagerank_nibble(g, seed, target_volume, alpha=0.15):
    """Best sweep cut over a halving schedule of push tolerances.

    Tolerances run over ``2**-k / target_volume`` for
    ``k = 0 .. floor(log2(target_volume))``.
    """
    if not target_volume > 0:
        raise DomainError("target_volume must be positive")
    if target_volume > g.total_volume / 2:
        raise DomainError("target_volume exceeds half the total volume")
    seeds = validate_seeds(g, [seed])
    best = None
    steps = int(math.floor(math.log2(target_volume))) if target_volume >= 1 else 0
    for k in range(steps + 1):
        eps = 2.0**-k / target_volume
        res = approximate_pagerank(g, seeds, DiffusionParams(alpha=alpha, eps=min(eps, 1.0 - 1e-12)))
        if not res.p:
            continue
        c = sweep_cut(g, res.p)
        if best is None or c.conductance < best.conductance:
            best = c
    if best is None:
        # nothing crossed the push threshold; the seed alone is the only candidate
        best = cluster_from_set(g, [int(seeds[0])])
    return best


# ---------------------------------------------------------------------------
# l1-regularized PageRank


class _Frame:
    """Local window of the graph: seeds, support and the support's neighbours.

    Holds the normalized adjacency restricted to the window so gradient
    evaluations are plain sparse mat-vecs.
    """

    def __init__(self, g, seeds, seed_mass):
        self.g = g
        self.index = {}
        self.verts = []
        self.expanded = set()
        self.seeds = seeds
        self.seed_mass = seed_mass
        for s in seeds.tolist():
            self._add(s)
        self.matrix = None
        self.q = np.zeros(0)

    def _add(self, v):
        if v not in self.index:
            self.index[v] = len(self.verts)
            self.verts.append(v)

    def expand(self, vs):
        grew = False
        for v in vs:
            if v in self.expanded:
                continue
            self.expanded.add(v)
            nbrs, _ = self.g.neighbors_of(v)
            for u in nbrs.tolist():
                if u not in self.index:
                    self._add(u)
                    grew = True
        return grew

    def rebuild(self):
        g = self.g
        k = len(self.verts)
        verts = np.asarray(self.verts, dtype=np.int64)
        rows, cols, vals = [], [], []
        for i, v in enumerate(self.verts):
            nbrs, ws = g.neighbors_of(v)
            for u, w in zip(nbrs.tolist(), ws.tolist()):
                j = self.index.get(u)
                if j is not None:
                    rows.append(i)
                    cols.append(j)
                    vals.append(w)
        sq = np.sqrt(g.degrees[verts])
        vals = np.asarray(vals, dtype=np.float64)
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        if vals.size:
            vals = vals / (sq[rows] * sq[cols])
        self.matrix = sparse.csr_matrix((vals, (rows, cols)), shape=(k, k))
        self.sqrt_deg = sq
        s = np.zeros(k)
        for v, m in zip(self.seeds.tolist(), self.seed_mass.tolist()):
            s[self.index[v]] = m
        self.seed_term = s / sq
        q = np.zeros(k)
        q[: self.q.shape[0]] = self.q
        self.q = q


def _smooth_gradient(frame, q, alpha):
    return 0.5 * (1 + alpha) * q - 0.5 * (1 - alpha) * (frame.matrix @ q) - alpha * frame.seed_term


def _objective_from(frame, q, grad, alpha, penalty):
    # f = 1/2 q'Qq - alpha s'q + pen'q, with Qq = grad + alpha s
    qq = grad + alpha * frame.seed_term
    return 0.5 * float(q @ qq) - alpha * float(frame.seed_term @ q) + float(penalty @ q)


def _kkt_residual(q, grad, penalty):
    z = grad + penalty
    pos = q > 0
    res = 0.0
    if pos.any():
        res = float(np.abs(z[pos]).max())
    if (~pos).any():
        res = max(res, float(np.maximum(-z[~pos], 0.0).max()))
    return res


@dataclass
class L1RegResult:
    q: SparseEmbedding
    iterations: int
    kkt_residual: float
    objective_trace: list = field(default_factory=list)


def _frame_for(g, seeds, q, seed_weighting="uniform"):
    seeds = validate_seeds(g, seeds)
    frame = _Frame(g, seeds, _seed_mass(g, seeds, seed_weighting))
    for v in q:
        frame._add(v)
    frame.expand(list(frame.index))
    frame.rebuild()
    vec = np.zeros(len(frame.verts))
    for v, x in q.items():
        vec[frame.index[v]] = x
    return frame, vec


def objective(g, q, seeds, params, seed_weighting="uniform"):
    """Value of the l1-regularized PageRank objective at the sparse point ``q``."""
    frame, vec = _frame_for(g, seeds, q, seed_weighting)
    grad = _smooth_gradient(frame, vec, params.alpha)
    penalty = params.rho * params.alpha * frame.sqrt_deg
    return _objective_from(frame, vec, grad, params.alpha, penalty)


def gradient(g, q, seeds, params, seed_weighting="uniform"):
    """Gradient of the objective (penalty included, as on the positive orthant).

    Returned as a dict over the seeds, support and support boundary; every
    other coordinate equals ``rho * alpha * sqrt(deg)``.
    """
    frame, vec = _frame_for(g, seeds, q, seed_weighting)
    grad = _smooth_gradient(frame, vec, params.alpha) + params.rho * params.alpha * frame.sqrt_deg
    return dict(zip(frame.verts, grad.tolist()))


def solve_l1reg(g, seeds, params=None, seed_weighting="uniform"):
    """Proximal gradient with unit step on the local window.

    The quadratic's spectrum sits in [alpha, 1], so step 1 never overshoots
    and the objective decreases monotonically.
    """
    params = params or DiffusionParams()
    seeds = validate_seeds(g, seeds)
    alpha = params.alpha
    frame = _Frame(g, seeds, _seed_mass(g, seeds, seed_weighting))
    frame.expand(seeds.tolist())
    frame.rebuild()
    trace = []
    best_q, best_res = None, math.inf
    for it in range(params.max_iters):
        q = frame.q
        grad = _smooth_gradient(frame, q, alpha)
        penalty = params.rho * alpha * frame.sqrt_deg
        res = _kkt_residual(q, grad, penalty)
        trace.append(_objective_from(frame, q, grad, alpha, penalty))
        if res < best_res:
            best_q, best_res = q.copy(), res
        if res <= params.kkt_tol:
            verts = np.asarray(frame.verts, dtype=np.int64)
            return L1RegResult(SparseEmbedding.from_arrays(verts, q), it, res, trace)
        q_new = np.maximum(q - grad - penalty, 0.0)
        frame.q = q_new
        fresh = [frame.verts[i] for i in np.flatnonzero(q_new > 0).tolist() if frame.verts[i] not in frame.expanded]
        if fresh and frame.expand(fresh):
            frame.rebuild()
    verts = np.asarray(frame.verts[: best_q.shape[0]], dtype=np.int64)
    raise ConvergenceError(
        f"l1-regularized PageRank did not reach kkt_tol={params.kkt_tol} in {params.max_iters} iterations "
        f"(best residual {best_res:.3g})",
        SparseEmbedding.from_arrays(verts, best_q),
        best_res,
    )


def l1reg_pagerank(g, seeds, params=None, seed_weighting="uniform"):
    return solve_l1reg(g, seeds, params, seed_weighting).q


def spectral_cluster(g, seeds, params=None, method="acl"):
    """Diffuse from ``seeds`` with ``method`` ("acl" or "l1reg") and sweep."""
    params = params or DiffusionParams()
    if method == "acl":
        x = approximate_pagerank(g, seeds, params).p
    elif method == "l1reg":
        x = l1reg_pagerank(g, seeds, params)
    else:
        raise ValueError(f"unknown spectral method {method!r}")
    if not x:
        raise DomainError("empty embedding")
    return sweep_cut(g, x)
