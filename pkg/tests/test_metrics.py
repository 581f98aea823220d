import numpy as np
import pytest

from polarium.graph import OpinionState, WeightedGraph
from polarium.metrics import (
    CONVEX_CATALOG,
    convex_divergence,
    divergence_report,
    gdi,
    is_majorized,
    is_polarizing,
    ndi,
)


def brute_ndi(graph, x):
    total = 0.0
    for u, v, w in zip(graph.edge_u, graph.edge_v, graph.edge_w):
        total += w * (x[u] - x[v]) ** 2
    return total


def brute_gdi(x):
    total = 0.0
    for i in range(len(x)):
        for j in range(i + 1, len(x)):
            total += (x[i] - x[j]) ** 2
    return total


class TestNdi:
    def test_consensus_zero(self):
        g = WeightedGraph.from_edges([(0, 1, 2.0), (1, 2, 5.0)])
        assert ndi(g, OpinionState.uniform(3, 0.3)) == 0.0

    def test_single_unit_edge(self):
        g = WeightedGraph.from_edges([(0, 1, 1.0)])
        assert ndi(g, OpinionState([0.0, 1.0])) == 1.0

    def test_unit_triangle_hand_value(self):
        # 0.25 + 0.25 + 1.0
        g = WeightedGraph.from_edges([(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)])
        assert ndi(g, OpinionState([0.0, 0.5, 1.0])) == 1.5

    def test_matches_brute_force(self):
        rng = np.random.default_rng(3)
        for _ in range(30):
            n = int(rng.integers(2, 15))
            edges = [(i, j, float(rng.uniform(0.1, 5)))
                     for i in range(n) for j in range(i + 1, n)
                     if rng.random() < 0.5]
            g = WeightedGraph.from_edges(edges, node_count=n)
            x = rng.random(n)
            assert ndi(g, x) == pytest.approx(brute_ndi(g, x), rel=1e-13)

    def test_dimension_mismatch(self):
        g = WeightedGraph.from_edges([(0, 1, 1.0)])
        with pytest.raises(ValueError, match="entries"):
            ndi(g, OpinionState([0.5, 0.5, 0.5]))


class TestGdi:
    def test_all_equal_zero(self):
        assert gdi(OpinionState.uniform(5, 0.8)) == 0.0

    def test_pair(self):
        assert gdi(OpinionState([0.0, 1.0])) == 1.0

    def test_three_point_hand_value(self):
        assert gdi(OpinionState([0.0, 0.5, 1.0])) == 1.5

    def test_single_node(self):
        assert gdi(OpinionState([0.4])) == 0.0

    def test_matches_brute_force(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            x = rng.random(int(rng.integers(1, 20)))
            assert gdi(x) == pytest.approx(brute_gdi(x), rel=1e-13, abs=1e-15)


class TestConvexDivergence:
    def test_square_equals_gdi(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            x = rng.random(8)
            assert convex_divergence(x, "square") == pytest.approx(gdi(x), rel=1e-13)

    def test_zero_at_consensus_for_all_catalog(self):
        x = np.full(6, 0.4)
        for name in CONVEX_CATALOG:
            assert convex_divergence(x, name) == 0.0

    def test_abs_pair(self):
        assert convex_divergence(np.array([0.0, 1.0]), "abs") == 1.0

    def test_unknown_catalog_entry(self):
        with pytest.raises(ValueError, match="unknown divergence"):
            convex_divergence(np.array([0.0, 1.0]), "cube")


class TestMajorization:
    def test_uniform_majorized_by_extreme(self):
        assert is_majorized([0.5, 0.5], [1.0, 0.0])

    def test_reflexive(self):
        rng = np.random.default_rng(6)
        for _ in range(10):
            x = rng.random(7)
            assert is_majorized(x, x)

    def test_prefix_violation(self):
        assert not is_majorized([0.8, 0.2], [0.7, 0.3])

    def test_sum_mismatch(self):
        assert not is_majorized([0.5, 0.5], [0.5, 0.6])

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="equal length"):
            is_majorized([0.5], [0.5, 0.5])

    def test_order_independence(self):
        assert is_majorized([0.5, 0.3, 0.2], [0.2, 0.8, 0.0])


class TestSchurConvexity:
    def test_catalog_monotone_under_majorization(self):
        # averaging under a doubly stochastic matrix is majorized by the input
        rng = np.random.default_rng(7)
        for _ in range(200):
            n = int(rng.integers(2, 10))
            x = rng.random(n)
            members = rng.choice(n, size=int(rng.integers(1, n + 1)), replace=False)
            y = x.copy()
            y[members] = (1 - 0.5) * y[members] + 0.5 * np.mean(y[members])
            if not is_majorized(y, x, tol=1e-10):
                continue
            for name in CONVEX_CATALOG:
                assert convex_divergence(y, name) <= convex_divergence(x, name) + 1e-12


class TestDivergenceReport:
    def test_zero_exactly_at_consensus(self):
        g = WeightedGraph.from_edges([(0, 1, 1.0), (1, 2, 3.0)])
        rep = divergence_report(g, OpinionState.uniform(3, 0.7, time_step=4))
        assert rep.ndi == 0.0 and rep.gdi == 0.0 and rep.time_step == 4

    def test_positive_off_consensus_on_connected_graph(self):
        g = WeightedGraph.from_edges([(0, 1, 1.0), (1, 2, 3.0)])
        rep = divergence_report(g, OpinionState([0.2, 0.2, 0.3]))
        assert rep.ndi > 0.0 and rep.gdi > 0.0


class TestPolarizingPredicate:
    def test_verdict_is_ndi_comparison(self):
        g = WeightedGraph.from_edges([(0, 1, 1.0)])
        lo = OpinionState([0.4, 0.6])
        hi = OpinionState([0.0, 1.0])
        assert is_polarizing(g, lo, hi)
        assert not is_polarizing(g, hi, lo)
        assert not is_polarizing(g, lo, lo)
