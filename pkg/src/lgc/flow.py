"""Flow-based cluster improvement: MQI, FlowImprove and SimpleLocal.

Each method repeatedly solves a max-flow problem whose minimum cut either
certifies that the current set is optimal for the method's ratio objective
or hands back a strictly better set. Capacities are exact integers, so
every ratio comparison is exact.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from lgc.graph import Cluster, DomainError, cluster_from_set
from lgc.maxflow import MAX_CAPACITY, FlowNetwork, max_flow

log = logging.getLogger(__name__)


@dataclass
class ImproveResult:
    cluster: Cluster
    iterations: int
    conductance_trace: list
    complemented: bool = False
    touched: int = 0
    history: list = field(default_factory=list, repr=False)

    def to_dict(self):
        out = self.cluster.to_dict()
        out["iterations"] = self.iterations
        out["trace"] = list(self.conductance_trace)
        if self.complemented:
            out["complemented"] = True
        return out

    def to_json(self):
        return json.dumps(self.to_dict())


class _IntWeights:
    """Integer view of edge weights: every weight times a common scale."""

    def __init__(self, g):
        self.g = g
        if not g.weighted:
            self.scale = 1
            self.w = None
            return
        uniq = np.unique(g.weights)
        scale = 1
        for x in uniq.tolist():
            scale = math.lcm(scale, Fraction(x).denominator)
            if scale > MAX_CAPACITY:
                raise OverflowError("edge weights need a common denominator wider than 63 bits; rescale them")
        self.scale = scale
        self.w = [int(Fraction(x) * scale) for x in g.weights.tolist()]

    def row(self, v):
        g = self.g
        lo, hi = int(g.offsets[v]), int(g.offsets[v + 1])
        nbrs = g.neighbors[lo:hi].tolist()
        if self.w is None:
            return nbrs, [1] * len(nbrs)
        return nbrs, self.w[lo:hi]

    def degree(self, v):
        if self.w is None:
            return int(self.g.offsets[v + 1] - self.g.offsets[v])
        return sum(self.row(v)[1])

    def total(self):
        if self.w is None:
            return int(self.g.neighbors.shape[0])
        return sum(self.w)


def _int_weights(g):
    iw = getattr(g, "_int_weights", None)
    if iw is None:
        iw = _IntWeights(g)
        g._int_weights = iw
    return iw


def _cut_vol(iw, members):
    inside = set(members)
    cut = vol = 0
    for v in members:
        nbrs, ws = iw.row(v)
        for u, w in zip(nbrs, ws):
            vol += w
            if u not in inside:
                cut += w
    return cut, vol


def _phi(cut, vol, total):
    return Fraction(cut, min(vol, total - vol))


def _prepare(g, a):
    """Normalise the input cluster; complement it when it holds over half the volume."""
    if isinstance(a, Cluster):
        members = list(a.members)
    else:
        members = sorted(set(int(v) for v in a))
    base = cluster_from_set(g, members)
    iw = _int_weights(g)
    total = iw.total()
    cut, vol = _cut_vol(iw, base.members)
    complemented = False
    if 2 * vol > total:
        inside = set(base.members)
        members = [v for v in range(g.n) if v not in inside]
        log.warning("input cluster holds more than half the volume; improving its complement")
        cut, vol = _cut_vol(iw, members)
        complemented = True
        base = cluster_from_set(g, members)
    if vol == 0:
        raise DomainError("cluster has zero volume")
    return base, iw, total, cut, vol, complemented


def mqi(g, a):
    """Minimum-conductance subset of ``a``.

    Rounds solve, for the current best ratio c/v, the problem
    ``min over S in a of v*cut(S) - c*vol(S)`` as a min cut on a network
    over the members of ``a``; a negative optimum is a strictly better set.
    """
    base, iw, total, cut, vol, complemented = _prepare(g, a)
    members = list(base.members)
    index = {v: i for i, v in enumerate(members)}
    k = len(members)
    rows = [iw.row(v) for v in members]
    degs = [sum(ws) for _, ws in rows]
    outside = [sum(w for u, w in zip(nbrs, ws) if u not in index) for nbrs, ws in rows]
    vol_a = vol
    best = members
    c, v = cut, vol
    trace = [_phi(c, v, total)]
    history = [(tuple(best), Fraction(c, v))]
    rounds = 0
    while True:
        rounds += 1
        net = FlowNetwork(k + 2, k, k + 1)
        for i in range(k):
            if degs[i]:
                net.add_arc(k, i, c * degs[i])
            if outside[i]:
                net.add_arc(i, k + 1, v * outside[i])
            nbrs, ws = rows[i]
            for u, w in zip(nbrs, ws):
                j = index.get(u)
                if j is not None and j > i:
                    net.add_edge(i, j, v * w)
        res = max_flow(net)
        if res.value >= c * vol_a:
            break
        side = sorted(members[i] for i in res.source_side if i < k)
        c2, v2 = _cut_vol(iw, side)
        if c2 * v >= c * v2:
            raise RuntimeError("MQI round reported an improvement that is not one")
        best, c, v = side, c2, v2
        trace.append(_phi(c, v, total))
        history.append((tuple(best), Fraction(c, v)))
    out = cluster_from_set(g, best)
    return ImproveResult(out, rounds, [float(x) for x in trace], complemented, k, history)


def _quotient(iw, members, in_a, eps):
    """Relative quotient cut(S) / (vol(S & A) - eps * vol(S - A)); None if the denominator is not positive."""
    cut, _ = _cut_vol(iw, members)
    den = Fraction(0)
    for v in members:
        d = iw.degree(v)
        den += d if v in in_a else -eps * d
    if den <= 0:
        return None
    return Fraction(cut) / den


class _Region:
    """The vertices a flow round is allowed to see; everything else is merged into the sink."""

    def __init__(self, iw, members, everything=False):
        self.iw = iw
        g = iw.g
        self.verts = list(range(g.n)) if everything else list(members)
        self.index = {v: i for i, v in enumerate(self.verts)}
        self.rows = {v: iw.row(v) for v in self.verts}

    def add(self, vs):
        for v in vs:
            if v not in self.index:
                self.index[v] = len(self.verts)
                self.verts.append(v)
                self.rows[v] = self.iw.row(v)

    def touched(self):
        seen = set(self.verts)
        for v in self.verts:
            seen.update(self.rows[v][0])
        return len(seen)


def _relative_round(region, in_a, vol_a, lam, eps):
    """One min-cut round of the relative-quotient objective at ratio ``lam``.

    Returns (improved source side or None). Grows ``region`` until the flow
    routed into merged outside vertices fits their own sink capacity, which
    makes the local cut optimal for the whole graph.
    """
    P, Q = lam.numerator, lam.denominator
    en, ed = eps.numerator, eps.denominator
    iw = region.iw
    while True:
        verts = region.verts
        k = len(verts)
        net = FlowNetwork(k + 2, k, k + 1)
        spill = {}
        for i, v in enumerate(verts):
            nbrs, ws = region.rows[v]
            d = sum(ws)
            if v in in_a:
                net.add_arc(k, i, P * ed * d)
            else:
                net.add_arc(i, k + 1, P * en * d)
            for u, w in zip(nbrs, ws):
                j = region.index.get(u)
                if j is None:
                    arc = net.add_arc(i, k + 1, Q * ed * w)
                    spill.setdefault(u, []).append(arc)
                elif j > i:
                    net.add_edge(i, j, Q * ed * w)
        res = max_flow(net)
        over = [
            u
            for u, arcs in spill.items()
            if sum(res.flow[a] for a in arcs) > P * en * iw.degree(u)
        ]
        if not over:
            break
        region.add(sorted(over))
    if res.value >= P * ed * vol_a:
        return None
    return sorted(verts[i] for i in res.source_side if i < k)


def _relative_improve(g, a, delta, local):
    base, iw, total, cut, vol, complemented = _prepare(g, a)
    in_a = set(base.members)
    theta = Fraction(vol, total - vol)
    eps = theta + delta
    region = _Region(iw, base.members, everything=not local)
    current = list(base.members)
    lam = Fraction(cut, vol)
    best_set, best_phi = current, _phi(cut, vol, total)
    trace = [best_phi]
    history = [(tuple(current), lam)]
    rounds = 0
    while True:
        rounds += 1
        side = _relative_round(region, in_a, vol, lam, eps)
        if side is None:
            break
        q = _quotient(iw, side, in_a, eps)
        if q is None or q >= lam:
            raise RuntimeError("flow round reported an improvement that is not one")
        lam = q
        current = side
        history.append((tuple(current), lam))
        c2, v2 = _cut_vol(iw, side)
        phi = _phi(c2, v2, total)
        if phi < best_phi:
            best_set, best_phi = side, phi
            trace.append(phi)
        elif phi == best_phi:
            best_set = side
    out = cluster_from_set(g, best_set)
    return ImproveResult(out, rounds, [float(x) for x in trace], complemented, region.touched(), history)


def flow_improve(g, a):
    """Improve ``a`` over the whole graph with the relative quotient objective.

    Minimises ``cut(S) / (vol(S & A) - theta * vol(S - A))`` with
    ``theta = vol(A) / (vol(V) - vol(A))``. The returned set is the
    lowest-conductance iterate, never worse than ``a``.
    """
    return _relative_improve(g, a, Fraction(0), local=False)


def simple_local(g, a, delta=0.5):
    """Strongly local FlowImprove.

    Outside vertices are penalised by ``theta + delta``; each round only
    looks at the part of the graph the flow actually reaches. ``delta=0``
    gives the same answer as :func:`flow_improve`.
    """
    if not delta >= 0 or not math.isfinite(delta):
        raise DomainError("delta must be a finite nonnegative number")
    return _relative_improve(g, a, Fraction(repr(float(delta))), local=True)
