import itertools
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from lgc.graph import Graph  # noqa: E402


def cliques_with_bridges(sizes, bridges):
    edges = []
    start = 0
    for c in sizes:
        edges += itertools.combinations(range(start, start + c), 2)
        start += c
    return Graph.from_edges(edges + list(bridges), n=start)


@pytest.fixture
def two_cliques():
    """Two K10 joined by the single edge 9-10."""
    return cliques_with_bridges([10, 10], [(9, 10)])


def random_graph(rng, n, p):
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p]
    return Graph.from_edges(edges, n=n)


def random_connected_graph(rng, n, p):
    """Random graph plus a random spanning path so every vertex has an edge."""
    perm = rng.permutation(n)
    edges = {(min(a, b), max(a, b)) for a, b in zip(perm[:-1].tolist(), perm[1:].tolist())}
    edges |= {(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p}
    return Graph.from_edges(sorted(edges), n=n)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
