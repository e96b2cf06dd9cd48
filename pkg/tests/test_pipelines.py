import csv
import io
import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_connected_graph
from lgc.diffusion import DiffusionParams, approximate_pagerank
from lgc.generators import (
    block_labels,
    clique_edges,
    disjoint_union,
    generate_synthetic,
    planted_partition,
    random_geometric,
    ring_of_cliques,
)
from lgc.graph import DomainError, Graph, cluster_from_set
from lgc.pipelines import (
    NCP_HEADER,
    assign_labels,
    class_scores,
    compute_ncp,
    evaluate_recovery,
    log_bins,
    ncp_to_csv,
    predict_labels,
)


def k10_pair():
    k = Graph.from_edges(clique_edges(range(10)))
    return disjoint_union([k, k])


class TestBins:
    def test_cover(self):
        for top in (1, 3, 10, 199, 1999):
            for count in (1, 4, 8, 20):
                bins = log_bins(top, count)
                assert bins[0][0] == 1 and bins[-1][1] == top
                assert all(b[0] == a[1] + 1 for a, b in zip(bins, bins[1:]))

    def test_bad(self):
        with pytest.raises(ValueError):
            log_bins(0, 3)


class TestNcp:
    def test_ring_size_ten_bin(self):
        g = ring_of_cliques(20, 10)
        recs = compute_ncp(g, bins=[(1, 1), (2, 9), (10, 10), (11, 30)], seeds_per_bin=3, rng_seed=42)
        by_bin = {r.size_bin: r for r in recs}
        ten = by_bin[(10, 10)]
        assert Fraction(int(ten.cluster_cut), int(ten.cluster_volume)) == Fraction(2, 92)
        assert ten.members in {tuple(range(i * 10, i * 10 + 10)) for i in range(20)}
        assert by_bin[(1, 1)].best_conductance == 1.0
        assert by_bin[(2, 9)].best_conductance > ten.best_conductance

    def test_k4(self):
        g = Graph.from_edges(clique_edges(range(4)))
        recs = compute_ncp(g, bins=[(1, 1), (2, 2), (3, 3)], seeds_per_bin=2, rng_seed=0)
        assert [r.size_bin for r in recs] == [(1, 1), (2, 2), (3, 3)]
        assert recs[0].best_conductance == 1.0
        assert recs[1].best_conductance == pytest.approx(4 / 6)
        assert recs[2].best_conductance == 1.0
        # no strict subset is larger than 3
        assert compute_ncp(g, bins=[(4, 8)], seeds_per_bin=1)[0].empty

    def test_records_reproducible(self, rng):
        g = random_connected_graph(rng, 60, 0.06)
        for r in compute_ncp(g, bins=5, seeds_per_bin=2, all_records=True):
            lo, hi = r.size_bin
            assert lo <= r.cluster_size <= hi
            c = cluster_from_set(g, r.members)
            assert c.conductance == r.best_conductance
            assert (c.cut, c.volume) == (r.cluster_cut, r.cluster_volume)

    @pytest.mark.parametrize("method", ["l1reg", "crd"])
    def test_other_methods(self, method):
        g = ring_of_cliques(6, 8)
        recs = compute_ncp(g, method=method, bins=[(8, 8)], seeds_per_bin=2, rng_seed=3)
        assert recs[0].best_conductance == pytest.approx(2 / 58)

    def test_deterministic_and_thread_independent(self):
        g = ring_of_cliques(8, 6)
        a = ncp_to_csv(compute_ncp(g, bins=6, seeds_per_bin=3, rng_seed=9, all_records=True))
        b = ncp_to_csv(compute_ncp(g, bins=6, seeds_per_bin=3, rng_seed=9, all_records=True, threads=4))
        c = ncp_to_csv(compute_ncp(g, bins=6, seeds_per_bin=3, rng_seed=9, all_records=True))
        assert a == b == c

    def test_csv(self):
        g = ring_of_cliques(4, 4)
        text = ncp_to_csv(compute_ncp(g, bins=[(4, 4), (100, 200)], seeds_per_bin=1))
        rows = list(csv.reader(io.StringIO(text)))
        assert rows[0] == NCP_HEADER
        assert rows[1][:3] == ["4", "4", "acl"]
        assert rows[2][:3] == ["100", "200", "acl"] and set(rows[2][3:]) == {""}

    def test_degree_sampling(self):
        g = ring_of_cliques(5, 5)
        recs = compute_ncp(g, bins=3, seeds_per_bin=2, sampling="degree")
        assert len(recs) == 3

    @pytest.mark.parametrize(
        "kw", [{"seeds_per_bin": 0}, {"bins": [(3, 2)]}, {"method": "heat"}, {"sampling": "weird"}]
    )
    def test_bad_args(self, kw):
        with pytest.raises((ValueError, KeyError)):
            compute_ncp(ring_of_cliques(3, 3), **kw)


class TestPredict:
    def test_disjoint_cliques(self):
        la = predict_labels(k10_pair(), {0: [0], 1: [15]})
        assert la.labels == [0] * 10 + [1] * 10

    def test_bridged_cliques(self, two_cliques):
        la = predict_labels(two_cliques, {1: [0], 2: [19]})
        assert la.labels == [1] * 10 + [2] * 10

    def test_unseeded_component(self):
        g = disjoint_union([k10_pair(), Graph.from_edges([(0, 1)])])
        la = predict_labels(g, {0: [0], 1: [15]})
        assert la.labels[20:] == [None, None]
        assert "20,unlabeled,0.0" in la.to_csv()

    def test_seeds_keep_class(self):
        g = Graph.from_edges(clique_edges(range(6)))
        la = predict_labels(g, {0: [0], 1: [1, 2, 3, 4]})
        assert la.labels[0] == 0 and la.labels[1:5] == [1, 1, 1, 1]

    def test_single_class_labels_support(self, rng):
        for _ in range(10):
            g = random_connected_graph(rng, 40, 0.05)
            params = DiffusionParams(eps=1e-3)
            la = predict_labels(g, {7: [0]}, params)
            support = set(approximate_pagerank(g, [0], params).p) | {0}
            assert {v for v, lab in enumerate(la.labels) if lab == 7} == support

    def test_tie_goes_to_lowest_class(self):
        g = Graph.from_edges([(0, 1), (1, 2)])
        la = predict_labels(g, {5: [0], 3: [2]})
        assert la.labels == [5, 3, 3]

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.floats(1e-3, 1e3))
    def test_argmax_scale_invariant(self, seed, factor):
        rng = np.random.default_rng(seed)
        g = random_connected_graph(rng, 30, 0.1)
        seeds = {0: [0], 1: [1], 2: [2]}
        scores = class_scores(g, seeds, DiffusionParams(eps=1e-4))
        base = assign_labels(g, seeds, scores).labels
        scaled = {c: {v: s * factor for v, s in sc.items()} for c, sc in scores.items()}
        assert assign_labels(g, seeds, scaled).labels == base

    def test_errors(self, two_cliques):
        with pytest.raises(DomainError):
            predict_labels(two_cliques, {0: [1], 1: [1]})
        with pytest.raises(DomainError):
            predict_labels(two_cliques, {0: [1], 1: []})
        with pytest.raises(DomainError):
            predict_labels(two_cliques, {})

    def test_accuracy(self, two_cliques):
        la = predict_labels(two_cliques, {0: [0], 1: [19]})
        assert la.accuracy([0] * 10 + [1] * 10) == 1.0


class TestRecovery:
    def test_identity(self, two_cliques):
        s = evaluate_recovery(two_cliques, range(10), range(10))
        assert (s.precision, s.recall) == (1.0, 1.0)

    def test_disjoint(self, two_cliques):
        s = evaluate_recovery(two_cliques, range(10), range(10, 20))
        assert (s.precision, s.recall) == (0.0, 0.0)

    def test_half_contained(self):
        g = Graph.from_edges(clique_edges(range(4)) + [(3, 4)])
        # degrees are 3, 3, 3 on the target; vertex 3 is outside it
        s = evaluate_recovery(g, [0, 1], [0, 1, 2])
        assert s.precision == 1.0 and s.recall == pytest.approx(2 / 3)
        k = Graph.from_edges(clique_edges(range(4)))
        h = evaluate_recovery(k, [0, 1], [0, 1, 2, 3])
        assert (h.precision, h.recall) == (1.0, 0.5)

    def test_symmetry(self, rng):
        for _ in range(50):
            g = random_connected_graph(rng, 15, 0.2)
            a = rng.choice(15, int(rng.integers(1, 15)), replace=False).tolist()
            b = rng.choice(15, int(rng.integers(1, 15)), replace=False).tolist()
            x, y = evaluate_recovery(g, a, b), evaluate_recovery(g, b, a)
            assert (x.precision, x.recall) == (y.recall, y.precision)
            assert (x.precision_cardinality, x.recall_cardinality) == (y.recall_cardinality, y.precision_cardinality)

    def test_json(self, two_cliques):
        d = json.loads(evaluate_recovery(two_cliques, range(5), range(10)).to_json())
        assert set(d) == {"precision", "recall", "precision_cardinality", "recall_cardinality"}
        assert d["recall_cardinality"] == 0.5

    def test_empty(self, two_cliques):
        with pytest.raises(DomainError):
            evaluate_recovery(two_cliques, [], [1])


class TestGenerators:
    def test_ring_counts(self):
        g = ring_of_cliques(3, 3)
        assert (g.n, g.m) == (9, 12)
        assert all(cluster_from_set(g, range(i * 3, i * 3 + 3)).cut == 2 for i in range(3))

    def test_ring_errors(self):
        for k, c in ((3, 1), (1, 5)):
            with pytest.raises(ValueError):
                ring_of_cliques(k, c)

    def test_planted_degenerate(self):
        g = planted_partition([4, 5, 3], 1.0, 0.0, rng_seed=1)
        assert g.m == 6 + 10 + 3
        lab = block_labels([4, 5, 3])
        for u, v, _ in g.edges():
            assert lab[u] == lab[v]

    def test_planted_errors(self):
        with pytest.raises(ValueError):
            planted_partition([5], 1.5, 0.0)
        with pytest.raises(ValueError):
            planted_partition([0, 3], 0.5, 0.1)

    def test_deterministic(self):
        for kind, kw in [
            ("ring_of_cliques", {"k": 4, "c": 3}),
            ("planted_partition", {"blocks": [10, 10], "p_in": 0.4, "p_out": 0.05}),
            ("random_geometric", {"n": 300, "radius": 0.1}),
        ]:
            assert generate_synthetic(kind, 5, **kw) == generate_synthetic(kind, 5, **kw)
        assert planted_partition([20, 20], 0.3, 0.1, 1) != planted_partition([20, 20], 0.3, 0.1, 2)

    def test_geometric_mean_degree(self):
        n, r = 5000, 0.02
        g = random_geometric(n, r, rng_seed=11)
        mean = g.total_volume / n
        # boundary effects only lower the mean; 10% covers them at this radius
        assert abs(mean - n * math.pi * r * r) <= 0.1 * n * math.pi * r * r

    def test_geometric_positions(self):
        g, pts = random_geometric(200, 0.15, rng_seed=2, return_positions=True)
        for u, v, _ in g.edges():
            assert np.hypot(*(pts[u] - pts[v])) < 0.15

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            generate_synthetic("lattice")
