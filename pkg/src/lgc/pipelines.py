"""Network community profiles, seeded label prediction and recovery scores."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from lgc.crd import CrdParams, crd_diffuse
from lgc.diffusion import DiffusionParams, approximate_pagerank, l1reg_pagerank
from lgc.generators import make_rng
from lgc.graph import Cluster, DomainError, sweep_profile, validate_seeds

DEFAULT_GRID = {
    "acl": [{"alpha": a, "eps": e} for a in (0.01, 0.1) for e in (1e-3, 1e-5, 1e-7)],
    "l1reg": [{"alpha": a, "rho": r} for a in (0.01, 0.1) for r in (1e-3, 1e-4, 1e-5)],
    "crd": [{"U": 3, "h": 10, "w": w} for w in (2, 4, 6)],
}

NCP_HEADER = ["bin_lo", "bin_hi", "method", "seed", "alpha", "eps", "rho", "size", "volume", "cut", "conductance"]


@dataclass(frozen=True)
class NcpRecord:
    size_bin: tuple
    method: str
    seed: int | None = None
    params: tuple = ()
    best_conductance: float | None = None
    cluster_size: int | None = None
    cluster_volume: float | None = None
    cluster_cut: float | None = None
    members: tuple = field(default=(), repr=False)

    @property
    def empty(self):
        return self.best_conductance is None

    def csv_row(self):
        p = dict(self.params)

        def fmt(x):
            if x is None:
                return ""
            return repr(float(x)) if isinstance(x, float) else str(x)

        return [
            self.size_bin[0],
            self.size_bin[1],
            self.method,
            fmt(self.seed),
            fmt(p.get("alpha")),
            fmt(p.get("eps")),
            fmt(p.get("rho")),
            fmt(self.cluster_size),
            fmt(self.cluster_volume),
            fmt(self.cluster_cut),
            fmt(self.best_conductance),
        ]


def log_bins(max_size, count):
    """Up to ``count`` integer size ranges ``(lo, hi)`` covering 1..max_size, log spaced."""
    if max_size < 1 or count < 1:
        raise ValueError("need max_size >= 1 and count >= 1")
    edges = np.unique(np.round(np.geomspace(1, max_size + 1, count + 1)).astype(np.int64))
    return [(int(lo), int(hi) - 1) for lo, hi in zip(edges[:-1], edges[1:])]


def _embedding(g, method, seed, params):
    if method == "acl":
        return approximate_pagerank(g, [seed], DiffusionParams(**params)).p
    if method == "l1reg":
        return l1reg_pagerank(g, [seed], DiffusionParams(**params))
    if method == "crd":
        return crd_diffuse(g, [seed], CrdParams(**params)).embedding()
    raise ValueError(f"unknown NCP method {method!r}")


def _best_in_range(g, cuts, vols, lo, hi):
    """Index of the lowest-conductance prefix whose size is in [lo, hi], or -1."""
    first, last = lo - 1, min(hi, cuts.shape[0]) - 1
    if first > last:
        return -1
    c = cuts[first : last + 1]
    d = np.minimum(vols[first : last + 1], g.total_volume - vols[first : last + 1])
    best, best_key = -1, None
    for i in np.flatnonzero(d > 0).tolist():
        key = c[i] / d[i] if g.weighted else Fraction(int(c[i]), int(d[i]))
        if best_key is None or key < best_key:
            best, best_key = i, key
    return -1 if best < 0 else first + best


def _run_seed(g, method, grid, size_bin, seed):
    out = []
    lo, hi = size_bin
    for params in grid:
        x = _embedding(g, method, seed, params)
        if not x:
            continue
        order, cuts, vols = sweep_profile(g, x)
        k = _best_in_range(g, cuts, vols, lo, hi)
        if k < 0:
            continue
        cut, vol = float(cuts[k]), float(vols[k])
        if not g.weighted:
            cut, vol = int(round(cut)), int(round(vol))
        phi = cut / min(vol, g.total_volume - vol)
        out.append(
            NcpRecord(
                size_bin,
                method,
                seed,
                tuple(sorted(params.items())),
                phi,
                k + 1,
                vol,
                cut,
                tuple(sorted(order[: k + 1].tolist())),
            )
        )
    return out


def _exact(rec, g):
    if g.weighted:
        return rec.best_conductance
    return Fraction(int(rec.cluster_cut), int(min(rec.cluster_volume, g.total_volume - rec.cluster_volume)))


def sample_seeds(g, count, rng, sampling="uniform"):
    pool = np.flatnonzero(g.degrees > 0)
    if pool.size == 0:
        raise DomainError("graph has no vertex with positive degree")
    if sampling == "uniform":
        prob = None
    elif sampling == "degree":
        prob = g.degrees[pool] / g.degrees[pool].sum()
    else:
        raise ValueError(f"unknown sampling {sampling!r}")
    replace = count > pool.size
    return rng.choice(pool, size=count, replace=replace, p=prob).tolist()


def compute_ncp(
    g,
    method="acl",
    grid=None,
    bins=8,
    seeds_per_bin=5,
    rng_seed=0,
    all_records=False,
    threads=1,
    sampling="uniform",
):
    """Approximate network community profile.

    For every size bin, ``seeds_per_bin`` seeds are drawn and the method is
    run over its parameter grid; each sweep contributes its best prefix
    whose size falls in the bin. Returns one record per bin (the minimum),
    or every contribution when ``all_records`` is set. Bins nobody reached
    get a record with ``best_conductance=None``.
    """
    if g.m == 0:
        raise DomainError("graph has no edges")
    if seeds_per_bin < 1:
        raise ValueError("seeds_per_bin must be at least 1")
    grid = DEFAULT_GRID[method] if grid is None else list(grid)
    if isinstance(bins, int):
        bins = log_bins(g.n - 1, bins)
    bins = [tuple(b) for b in bins]
    for lo, hi in bins:
        if not 1 <= lo <= hi:
            raise ValueError(f"invalid size bin {(lo, hi)}")
    rng = make_rng(rng_seed)
    jobs = [(b, s) for b in bins for s in sample_seeds(g, seeds_per_bin, rng, sampling)]

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda job: _run_seed(g, method, grid, *job), jobs))
    else:
        results = [_run_seed(g, method, grid, *job) for job in jobs]

    records = []
    for b in bins:
        found = [r for (jb, _), rs in zip(jobs, results) if jb == b for r in rs]
        if all_records:
            records.extend(found)
        if not found:
            records.append(NcpRecord(b, method))
        elif not all_records:
            records.append(min(found, key=lambda r: (_exact(r, g), r.cluster_size, r.seed, r.params)))
    return sorted(records, key=lambda r: (r.size_bin, r.seed if r.seed is not None else -1, r.params, r.cluster_size or 0))


def ncp_to_csv(records):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(NCP_HEADER)
    for r in records:
        w.writerow(r.csv_row())
    return buf.getvalue()


# ---------------------------------------------------------------------------
# label prediction


@dataclass
class LabelAssignment:
    labels: list
    scores: list

    def accuracy(self, truth):
        hits = sum(1 for lab, t in zip(self.labels, truth) if lab == t)
        return hits / len(truth)

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["vertex", "label", "score"])
        for v, (lab, sc) in enumerate(zip(self.labels, self.scores)):
            w.writerow([v, "unlabeled" if lab is None else lab, repr(float(sc))])
        return buf.getvalue()


def class_scores(g, class_seeds, params=None, method="acl"):
    """Degree-normalised diffusion score of every touched vertex, per class."""
    params = params or DiffusionParams()
    out = {}
    for c in sorted(class_seeds):
        if method == "acl":
            x = approximate_pagerank(g, class_seeds[c], params).p
        elif method == "l1reg":
            x = l1reg_pagerank(g, class_seeds[c], params)
        else:
            raise ValueError(f"unknown method {method!r}")
        out[c] = {v: float(val / g.degrees[v]) for v, val in x.items()}
    return out


def assign_labels(g, class_seeds, scores):
    """Argmax over classes; ties go to the smallest class id, seeds keep their class."""
    labels = [None] * g.n
    best = [0.0] * g.n
    for c in sorted(scores):
        for v, s in scores[c].items():
            if s > best[v]:
                best[v] = s
                labels[v] = c
    for c, seeds in class_seeds.items():
        for v in seeds:
            labels[v] = c
            best[v] = scores[c].get(v, 0.0)
    return LabelAssignment(labels, best)


def predict_labels(g, class_seeds, params=None, method="acl"):
    """One seeded diffusion per class, vertex goes to the class with the largest score."""
    if not class_seeds:
        raise DomainError("no classes given")
    seen = set()
    clean = {}
    for c in sorted(class_seeds):
        seeds = validate_seeds(g, class_seeds[c]).tolist()
        if seen.intersection(seeds):
            raise DomainError("seed sets of different classes overlap")
        seen.update(seeds)
        clean[c] = seeds
    return assign_labels(g, clean, class_scores(g, clean, params, method))


# ---------------------------------------------------------------------------
# recovery


@dataclass(frozen=True)
class RecoveryScore:
    precision: float
    recall: float
    precision_cardinality: float
    recall_cardinality: float

    def to_json(self):
        return json.dumps(
            {
                "precision": self.precision,
                "recall": self.recall,
                "precision_cardinality": self.precision_cardinality,
                "recall_cardinality": self.recall_cardinality,
            }
        )


def evaluate_recovery(g, found, target):
    """Volume-weighted precision and recall of ``found`` against ``target``."""
    a = set(found.members if isinstance(found, Cluster) else found)
    b = set(target.members if isinstance(target, Cluster) else target)
    if not a or not b:
        raise DomainError("clusters must be nonempty")
    both = sorted(a & b)

    def vol(s):
        return math.fsum(g.degrees[v] for v in s)

    va, vb, vab = vol(a), vol(b), vol(both)
    if va <= 0 or vb <= 0:
        raise DomainError("clusters must have positive volume")
    return RecoveryScore(vab / va, vab / vb, len(both) / len(a), len(both) / len(b))
