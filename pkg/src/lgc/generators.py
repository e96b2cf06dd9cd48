"""Synthetic graphs for tests and demos.

All randomness comes from numpy's PCG64 bit generator, seeded explicitly,
so a given ``rng_seed`` yields the same graph on every platform.
"""

import itertools

import numpy as np
from scipy.spatial import cKDTree

from lgc.graph import Graph


def make_rng(rng_seed):
    return np.random.Generator(np.random.PCG64(rng_seed))


def clique_edges(vertices):
    return list(itertools.combinations(vertices, 2))


def ring_of_cliques(k, c):
    """``k`` cliques of ``c`` vertices; clique i's last vertex links to clique i+1's first."""
    if c < 2:
        raise ValueError("cliques need at least 2 vertices")
    if k < 2:
        raise ValueError("a ring needs at least 2 cliques")
    edges = []
    for i in range(k):
        edges += clique_edges(range(i * c, (i + 1) * c))
        edges.append((i * c + c - 1, ((i + 1) % k) * c))
    return Graph.from_edges(edges, n=k * c)


def planted_partition(blocks, p_in, p_out, rng_seed=0):
    """Stochastic block model with equal in-block and out-block probabilities.

    ``blocks`` is a list of block sizes; vertices are numbered block by
    block.
    """
    if not (0.0 <= p_in <= 1.0 and 0.0 <= p_out <= 1.0):
        raise ValueError("probabilities must lie in [0, 1]")
    sizes = list(blocks)
    if not sizes or min(sizes) < 1:
        raise ValueError("blocks must be positive sizes")
    rng = make_rng(rng_seed)
    starts = np.concatenate(([0], np.cumsum(sizes)))
    n = int(starts[-1])
    us, vs = [], []
    for i, j in itertools.combinations_with_replacement(range(len(sizes)), 2):
        p = p_in if i == j else p_out
        hit = rng.random((sizes[i], sizes[j])) < p
        if i == j:
            hit = np.triu(hit, 1)
        a, b = np.nonzero(hit)
        us.append(a + starts[i])
        vs.append(b + starts[j])
    u = np.concatenate(us)
    v = np.concatenate(vs)
    return Graph.from_edges(np.column_stack((u, v)), n=n)


def block_labels(blocks):
    return np.repeat(np.arange(len(blocks)), blocks)


def random_geometric(n, radius, rng_seed=0, return_positions=False):
    """Points uniform on the unit square, joined when closer than ``radius``."""
    if n < 1 or not radius > 0:
        raise ValueError("need n >= 1 and a positive radius")
    rng = make_rng(rng_seed)
    pts = rng.random((n, 2))
    pairs = cKDTree(pts).query_pairs(radius, output_type="ndarray")
    g = Graph.from_edges(pairs.reshape(-1, 2), n=n)
    return (g, pts) if return_positions else g


def disjoint_union(graphs):
    """Stack graphs side by side; vertex ids of graph i are shifted past graphs 0..i-1."""
    offsets, neighbors, weights = [np.zeros(1, dtype=np.int64)], [], []
    shift = 0
    edge_shift = 0
    for g in graphs:
        offsets.append(g.offsets[1:] + edge_shift)
        neighbors.append(g.neighbors.astype(np.int64) + shift)
        weights.append(g.weights)
        shift += g.n
        edge_shift += g.neighbors.shape[0]
    return Graph(
        np.concatenate(offsets),
        np.concatenate(neighbors),
        np.concatenate(weights),
        weighted=any(g.weighted for g in graphs),
    )


def generate_synthetic(kind, rng_seed=0, **params):
    if kind == "ring_of_cliques":
        return ring_of_cliques(params["k"], params["c"])
    if kind == "planted_partition":
        return planted_partition(params["blocks"], params["p_in"], params["p_out"], rng_seed)
    if kind == "random_geometric":
        return random_geometric(params["n"], params["radius"], rng_seed)
    raise ValueError(f"unknown generator {kind!r}")
