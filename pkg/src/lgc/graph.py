"""Immutable graph storage, edge-list ingestion, conductance and sweep cuts."""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from lgc import _kernels

# comparison slack for conductance on weighted graphs
WEIGHTED_TOL = 1e-12


class GraphFormatError(ValueError):
    """Malformed edge-list input."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}:"
            if line is not None:
                where += f"{line}:"
            where += " "
        super().__init__(where + message)


class DomainError(ValueError):
    """An operation was asked for a quantity that is undefined on its input."""


class Graph:
    """Undirected weighted graph in compressed adjacency form.

    Arrays are read-only after construction; instances can be shared freely
    between threads.
    """

    def __init__(self, offsets, neighbors, weights, weighted=None):
        offsets = np.ascontiguousarray(offsets, dtype=np.int64)
        neighbors = np.ascontiguousarray(neighbors)
        if neighbors.dtype not in (np.int32, np.int64):
            neighbors = neighbors.astype(np.int64)
        weights = np.ascontiguousarray(weights, dtype=np.float64)
        if offsets.ndim != 1 or offsets.shape[0] < 1 or offsets[0] != 0:
            raise ValueError("offsets must start at 0")
        if offsets[-1] != neighbors.shape[0] or weights.shape != neighbors.shape:
            raise ValueError("offsets, neighbors and weights disagree in length")
        self.n = offsets.shape[0] - 1
        self.offsets = offsets
        self.neighbors = neighbors
        self.weights = weights
        self.degrees = _kernels.row_sums(offsets, weights)
        if weighted is None:
            weighted = bool(weights.size) and not np.all(weights == 1.0)
        self.weighted = bool(weighted)
        self.m = neighbors.shape[0] // 2
        self.total_volume = float(self.degrees.sum())
        for arr in (self.offsets, self.neighbors, self.weights, self.degrees):
            arr.flags.writeable = False
        self._local = threading.local()

    @classmethod
    def from_edges(cls, edges, n=None, weights=None):
        """Build from an iterable of ``(u, v)`` pairs.

        Self-loops are dropped. Duplicates collapse to weight 1 when
        ``weights`` is None, and are summed otherwise.
        """
        arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges, dtype=np.int64)
        arr = arr.reshape(-1, 2)
        w = None if weights is None else np.asarray(weights, dtype=np.float64)
        if n is None:
            n = int(arr.max()) + 1 if arr.size else 0
        cols = [arr[:, 0], arr[:, 1]]
        del arr
        return _assemble(cols, w, n)

    def __repr__(self):
        kind = "weighted" if self.weighted else "unweighted"
        return f"Graph(n={self.n}, m={self.m}, {kind})"

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.offsets, other.offsets)
            and np.array_equal(self.neighbors, other.neighbors)
            and np.array_equal(self.weights, other.weights)
        )

    __hash__ = object.__hash__

    def neighbors_of(self, v):
        lo, hi = self.offsets[v], self.offsets[v + 1]
        return self.neighbors[lo:hi], self.weights[lo:hi]

    def degree(self, v):
        d = self.degrees[v]
        return int(d) if not self.weighted else float(d)

    def edges(self):
        """Yield each undirected edge once as ``(u, v, w)`` with ``u < v``."""
        for u in range(self.n):
            nbrs, ws = self.neighbors_of(u)
            for v, w in zip(nbrs.tolist(), ws.tolist()):
                if u < v:
                    yield u, v, w

    def scratch(self):
        """Per-thread position buffer (all -1) handed to the compiled kernels."""
        buf = getattr(self._local, "pos", None)
        if buf is None:
            buf = np.full(self.n, -1, dtype=np.int64)
            self._local.pos = buf
        return buf

    def nbytes(self):
        return self.offsets.nbytes + self.neighbors.nbytes + self.weights.nbytes + self.degrees.nbytes

    def check(self):
        """Raise AssertionError unless every structural invariant holds."""
        adj = {}
        for u in range(self.n):
            nbrs, ws = self.neighbors_of(u)
            assert len(set(nbrs.tolist())) == len(nbrs), f"duplicate entry in row {u}"
            assert u not in set(nbrs.tolist()), f"self-loop at {u}"
            assert np.all(ws >= 0)
            assert self.degrees[u] == sum(ws.tolist())
            for v, w in zip(nbrs.tolist(), ws.tolist()):
                adj[(u, v)] = w
        for (u, v), w in adj.items():
            assert adj.get((v, u)) == w, f"asymmetric edge {u}-{v}"
        assert abs(self.total_volume - 2 * sum(w for _, _, w in self.edges())) <= 1e-9 * max(1.0, self.total_volume)


def _assemble(cols, w, n):
    # cols is emptied so the raw id columns can be freed as soon as the keys exist
    u, v = cols
    cols.clear()
    if u.size and (u.min() < 0 or v.min() < 0):
        raise GraphFormatError("vertex ids must be nonnegative")
    if u.size and max(int(u.max()), int(v.max())) >= n:
        raise GraphFormatError("vertex id out of range")
    if w is not None and w.size and (not np.all(np.isfinite(w)) or w.min() <= 0):
        raise GraphFormatError("edge weights must be positive and finite")
    keep = u != v
    if not keep.all():
        u, v = u[keep], v[keep]
        if w is not None:
            w = w[keep]
    key = np.minimum(u, v)
    key *= n
    key += np.maximum(u, v)
    del u, v
    if w is None:
        key = np.unique(key)
        wk = np.ones(key.shape[0])
    else:
        order = np.argsort(key, kind="stable")
        key = key[order]
        w = w[order]
        del order
        if key.size:
            starts = np.flatnonzero(np.concatenate(([True], key[1:] != key[:-1])))
            wk = np.add.reduceat(w, starts)
            key = key[starts]
        else:
            wk = w
    idx_t = np.int32 if n < 2**31 else np.int64
    a = (key // n).astype(idx_t)
    b = (key % n).astype(idx_t)
    del key
    counts = np.bincount(a, minlength=n) + np.bincount(b, minlength=n)
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])
    del counts
    neighbors = np.empty(2 * a.shape[0], dtype=idx_t)
    weights = np.empty(2 * a.shape[0], dtype=np.float64)
    _kernels.build_csr(n, a, b, wk, neighbors, weights, offsets)
    return Graph(offsets, neighbors, weights, weighted=w is not None)


def _scan_for_error(path, weighted, comment):
    """Locate the first bad line of an edge list; only used on the error path."""
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.strip()
            if not text or text.startswith(comment):
                continue
            parts = text.split()
            if len(parts) not in (2, 3) or (weighted and len(parts) != 3):
                want = "'u v w'" if weighted else "'u v' or 'u v w'"
                raise GraphFormatError(f"expected {want}, got {text!r}", path, lineno)
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise GraphFormatError(f"vertex ids must be integers, got {text!r}", path, lineno) from None
            if u < 0 or v < 0:
                raise GraphFormatError("negative vertex id", path, lineno)
            if len(parts) == 3:
                try:
                    w = float(parts[2])
                except ValueError:
                    raise GraphFormatError(f"bad weight {parts[2]!r}", path, lineno) from None
                if not w > 0:
                    raise GraphFormatError(f"weight must be positive, got {parts[2]}", path, lineno)
    return None


def _first_row_width(path, comment):
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            text = line.strip()
            if text and not text.startswith(comment):
                return len(text.split())
    return None


def load_edge_list(path, weighted=False, comment="#", compact=False):
    """Read a whitespace-separated edge list into a :class:`Graph`.

    Vertex count is ``1 + max id`` unless ``compact`` is set, in which case
    ids are remapped densely in ascending order and ``(graph, original_ids)``
    is returned.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    ncols = _first_row_width(path, comment)
    if ncols is None:
        raise GraphFormatError("empty graph: no edges", path)
    if ncols not in (2, 3) or (weighted and ncols != 3):
        _scan_for_error(path, weighted, comment)
    three = ncols == 3
    try:
        with open(path, encoding="utf-8") as fh:
            # a ragged file makes loadtxt raise, which routes to the line scanner
            data = np.loadtxt(fh, dtype=np.float64 if three else np.int64, comments=comment, ndmin=2)
    except ValueError as exc:
        _scan_for_error(path, weighted, comment)
        raise GraphFormatError(str(exc), path) from None
    if three:
        ids = data[:, :2]
        w = data[:, 2].copy()
        if not np.all(ids == np.floor(ids)) or ids.min() < 0 or not np.all(w > 0):
            _scan_for_error(path, True, comment)
            raise GraphFormatError("bad vertex id or nonpositive weight", path)
        u = ids[:, 0].astype(np.int64)
        v = ids[:, 1].astype(np.int64)
        if not weighted:
            w = None
    else:
        if data.min() < 0:
            _scan_for_error(path, weighted, comment)
        u = data[:, 0]
        v = data[:, 1]
        w = None
    del data
    cols = [u, v]
    mapping = None
    if compact:
        mapping, inv = np.unique(np.concatenate(cols), return_inverse=True)
        k = u.shape[0]
        cols = [inv[:k], inv[k:]]
        del inv
        n = mapping.shape[0]
    else:
        n = int(max(u.max(), v.max())) + 1
    del u, v
    g = _assemble(cols, w, n)
    if g.m == 0:
        raise GraphFormatError("empty graph: only self-loops", path)
    return (g, mapping) if compact else g


def write_edge_list(g, path, weighted=None):
    weighted = g.weighted if weighted is None else weighted
    with open(path, "w", encoding="utf-8") as fh:
        for u, v, w in g.edges():
            if weighted:
                fh.write(f"{u} {v} {w!r}\n")
            else:
                fh.write(f"{u} {v}\n")


def _as_members(g, s):
    members = np.asarray(sorted(s) if not isinstance(s, np.ndarray) else np.sort(s), dtype=np.int64)
    if members.size == 0:
        raise DomainError("empty vertex set")
    if members[0] < 0 or members[-1] >= g.n:
        raise DomainError("vertex id out of range")
    if np.any(members[1:] == members[:-1]):
        raise DomainError("duplicate vertex ids")
    if members.size >= g.n:
        raise DomainError("set must be a strict subset of the vertices")
    return members


def _cut_and_volume(g, members):
    inside = np.zeros(g.n, dtype=bool)
    inside[members] = True
    vol = 0.0
    cut = 0.0
    for v in members.tolist():
        nbrs, ws = g.neighbors_of(v)
        vol += g.degrees[v]
        cut += ws[~inside[nbrs]].sum()
    return cut, vol


def _ratio(g, cut, vol):
    den = min(vol, g.total_volume - vol)
    if den <= 0:
        raise DomainError("conductance undefined: zero volume on one side")
    if g.weighted:
        return cut / den
    return int(cut) / int(den)


def conductance(g, s):
    """cut(s) / min(vol(s), vol(V) - vol(s))."""
    members = _as_members(g, s)
    cut, vol = _cut_and_volume(g, members)
    return _ratio(g, cut, vol)


@dataclass(frozen=True)
class Cluster:
    """A vertex set with its cut, volume and conductance cached."""

    members: tuple
    cut: float
    volume: float
    conductance: float

    def __len__(self):
        return len(self.members)

    def __contains__(self, v):
        return v in set(self.members)

    @property
    def size(self):
        return len(self.members)

    def exact_conductance(self, g):
        """Conductance as a Fraction; only meaningful for unweighted graphs."""
        den = min(self.volume, g.total_volume - self.volume)
        return Fraction(int(self.cut), int(den))

    def to_dict(self):
        return {
            "members": list(self.members),
            "cut": self.cut,
            "volume": self.volume,
            "conductance": self.conductance,
        }

    def to_json(self):
        return json.dumps(self.to_dict())

    def to_text(self):
        return "".join(f"{v}\n" for v in self.members)


def cluster_from_set(g, s):
    members = _as_members(g, s)
    cut, vol = _cut_and_volume(g, members)
    phi = _ratio(g, cut, vol)
    if not g.weighted:
        cut, vol = int(cut), int(vol)
    return Cluster(tuple(members.tolist()), cut, vol, phi)


def load_cluster(g, path):
    """Read a cluster saved as JSON or as one id per line."""
    text = Path(path).read_text(encoding="utf-8").strip()
    if text.startswith("{"):
        ids = json.loads(text)["members"]
    else:
        try:
            ids = [int(tok) for tok in text.split()]
        except ValueError as exc:
            raise GraphFormatError(str(exc), path) from None
    return cluster_from_set(g, ids)


def validate_seeds(g, seeds):
    """Return seeds as an int64 array after checking the seed-set rules."""
    if np.isscalar(seeds):
        seeds = [seeds]
    arr = np.asarray(list(seeds), dtype=np.int64)
    if arr.size == 0:
        raise DomainError("seed set is empty")
    if len(set(arr.tolist())) != arr.size:
        raise DomainError("duplicate seeds")
    if arr.min() < 0 or arr.max() >= g.n:
        raise DomainError("seed out of range")
    if np.any(g.degrees[arr] <= 0):
        raise DomainError("seed has degree 0")
    return arr


def best_prefix(g, cuts, vols):
    """Index of the minimum-conductance prefix, or -1 if none is admissible.

    The last prefix counts only if it is a strict subset; ties go to the
    shorter prefix.
    """
    den = np.minimum(vols, g.total_volume - vols)
    ok = den > 0
    if not ok.any():
        return -1
    phi = np.full(cuts.shape, np.inf)
    phi[ok] = cuts[ok] / den[ok]
    best = float(phi.min())
    if g.weighted:
        return int(np.flatnonzero(phi <= best + WEIGHTED_TOL)[0])
    # floats only shortlist; the exact winner is picked with integer ratios
    cand = np.flatnonzero(phi <= best * (1 + 1e-9) + 1e-300)
    win = int(cand[0])
    wc, wd = int(cuts[win]), int(den[win])
    for i in cand[1:].tolist():
        c, d = int(cuts[i]), int(den[i])
        if c * wd < wc * d:
            win, wc, wd = i, c, d
    return win


def sweep_order(g, x):
    """Support of ``x`` sorted by x(v)/deg(v) descending, ties by id."""
    verts = np.fromiter(x.keys(), dtype=np.int64, count=len(x))
    vals = np.fromiter(x.values(), dtype=np.float64, count=len(x))
    deg = g.degrees[verts]
    if np.any(deg <= 0):
        raise DomainError("embedding is supported on a degree-0 vertex")
    order = np.lexsort((verts, -(vals / deg)))
    return verts[order]


def sweep_profile(g, x):
    """Sweep order plus cut and volume of every prefix."""
    order = sweep_order(g, x)
    if g.n == order.shape[0]:
        order_scan = order[:-1]
    else:
        order_scan = order
    cuts, vols = _kernels.prefix_cuts(g.offsets, g.neighbors, g.weights, g.degrees, order_scan, g.scratch())
    return order_scan, cuts, vols


def sweep_cut(g, x):
    """Best degree-normalised prefix of a nonnegative sparse vector."""
    if not x or len(x) == 0:
        raise DomainError("empty embedding")
    if any(val < 0 for val in x.values()):
        raise DomainError("embedding has negative entries")
    order, cuts, vols = sweep_profile(g, x)
    if order.shape[0] == 0:
        raise DomainError("no strict-subset prefix to sweep")
    k = best_prefix(g, cuts, vols)
    if k < 0:
        raise DomainError("no prefix with defined conductance")
    members = np.sort(order[: k + 1])
    cut, vol = cuts[k], vols[k]
    if not g.weighted:
        cut, vol = int(round(cut)), int(round(vol))
    return Cluster(tuple(members.tolist()), cut, vol, _ratio(g, cut, vol))
