import networkx as nx
import numpy as np
import pytest
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

from conftest import three_sigma
from fpptree import graphs as graphs_mod
from fpptree.fpp import (
    bfst, degree_via_excision, empirical_tree_degrees, mean_tree_degree, shortest_path_tree,
    tree_degree_of,
)
from fpptree.graphs import WeightedMultiGraph, build_complete_graph, configuration_model
from fpptree.stochastic import DegreeLaw, WeightLaw


def triangle():
    # vertices 0, 1, 2 with w(0,1)=1, w(0,2)=4, w(1,2)=2
    return WeightedMultiGraph(3, [0, 0, 1], [1, 2, 2], [1.0, 4.0, 2.0])


def star(n):
    return WeightedMultiGraph(n, np.zeros(n - 1, int), np.arange(1, n), np.linspace(1, 2, n - 1))


def scipy_distances(g, source):
    if hasattr(g, "square"):
        g = g.to_multigraph()
    # keep only the lightest parallel copy; scipy would sum duplicates
    m = {}
    for a, b, w in zip(g.u, g.v, g.w):
        if a == b:
            continue
        key = (min(a, b), max(a, b))
        m[key] = min(m.get(key, np.inf), w)
    r = np.array([k[0] for k in m]), np.array([k[1] for k in m])
    mat = coo_matrix((list(m.values()), r), shape=(g.n, g.n)).tocsr()
    return dijkstra(mat, directed=False, indices=source)


def check_tree_invariants(g, t):
    reached = t.reached_mask
    assert t.tree_degree.sum() == 2 * (t.reached - 1)
    assert np.all(t.tree_degree <= g.degrees())
    others = np.flatnonzero(reached & (np.arange(g.n) != t.source))
    w = g.w[t.parent_edge[others]]
    assert np.allclose(t.dist[others], t.dist[t.parent[others]] + w, rtol=1e-12, atol=0)
    assert np.all(np.diff(t.dist[t.order]) >= 0)
    both = reached[g.u] & reached[g.v]
    assert np.all(t.dist[g.v[both]] <= t.dist[g.u[both]] + g.w[both] * (1 + 1e-12))
    assert np.all(t.dist[g.u[both]] <= t.dist[g.v[both]] + g.w[both] * (1 + 1e-12))


class TestShortestPathTree:
    def test_triangle_by_hand(self):
        t = shortest_path_tree(triangle(), 0)
        assert list(t.dist) == [0, 1, 3]
        assert sorted(t.tree_edges().tolist()) == [0, 2]
        assert list(t.tree_degree) == [1, 2, 1]
        assert tree_degree_of(t, 1) == 2

    def test_star_from_centre(self):
        t = shortest_path_tree(star(10), 0)
        assert t.tree_degree[0] == 9 and np.all(t.tree_degree[1:] == 1)
        assert sorted(t.tree_edges().tolist()) == list(range(9))

    def test_two_components(self):
        g = WeightedMultiGraph(5, [0, 1, 3], [1, 2, 4], [1.0, 1.0, 1.0])
        t = shortest_path_tree(g, 3)
        assert t.reached == 2
        assert list(t.tree_degree) == [0, 0, 0, 1, 1]
        assert np.all(np.isinf(t.dist[:3])) and np.all(t.parent[:3] == -1)
        assert mean_tree_degree(t) == 2 * (2 - 1) / 5

    def test_path_pmf(self):
        g = WeightedMultiGraph(3, [0, 1], [1, 2], [1.0, 1.0])
        d = empirical_tree_degrees(shortest_path_tree(g, 0))
        assert d.as_dict() == pytest.approx({1: 2 / 3, 2: 1 / 3})

    def test_two_vertices(self):
        t = shortest_path_tree(WeightedMultiGraph(2, [0], [1], [0.3]), 1)
        assert mean_tree_degree(t) == 1.0

    def test_parallel_edges_and_loops(self):
        g = WeightedMultiGraph(2, [0, 0, 0], [0, 1, 1], [0.1, 2.0, 0.5])
        t = shortest_path_tree(g, 0)
        assert t.dist[1] == 0.5 and t.parent_edge[1] == 2 and list(t.tree_degree) == [1, 1]

    def test_matches_scipy_on_configuration_model(self, gen):
        g = configuration_model(DegreeLaw.powerlaw(2.5, 1), 3000, WeightLaw("exponential"), gen)
        for src in gen.choice(g.n, 5, replace=False):
            t = shortest_path_tree(g, int(src))
            assert np.allclose(t.dist, scipy_distances(g, int(src)), rtol=1e-12)
            check_tree_invariants(g, t)

    def test_complete_graph_both_kernels(self, gen, monkeypatch):
        g = build_complete_graph(400, 1.0, gen)
        t_sq = shortest_path_tree(g, 17)
        assert g.square() is not None
        assert np.allclose(t_sq.dist, scipy_distances(g, 17), rtol=1e-12)
        monkeypatch.setattr(graphs_mod, "SQUARE_CACHE_BYTES", 0)
        g2 = build_complete_graph(400, 1.0, gen)
        t_dense = shortest_path_tree(g2, 17)
        assert g2.square() is None
        assert np.allclose(t_dense.dist, scipy_distances(g2, 17), rtol=1e-12)
        check_tree_invariants(g2.to_multigraph(), t_dense)

    def test_mean_degree_connected(self, gen):
        g = build_complete_graph(300, 2.0, gen)
        t = shortest_path_tree(g, 0)
        assert t.reached == 300 and mean_tree_degree(t) == 2 * 299 / 300
        assert t.tree_degree.mean() == pytest.approx(mean_tree_degree(t), abs=1e-15)

    def test_rejects_bad_source(self):
        with pytest.raises(ValueError):
            shortest_path_tree(triangle(), 3)

    def test_write_table(self, tmp_path):
        t = shortest_path_tree(triangle(), 0)
        t.write(tmp_path / "t.txt")
        rows = np.loadtxt(tmp_path / "t.txt")
        assert rows.shape == (3, 5)
        assert list(rows[:, 4]) == [1, 2, 1] and list(rows[:, 1]) == [-1, 0, 1]


class TestBreadthFirstTree:
    def test_path_graph_equals_bfs(self, gen):
        g = WeightedMultiGraph(4, [0, 1, 2], [1, 2, 3])
        t = bfst(g, 0, gen)
        assert list(t.hops) == [0, 1, 2, 3] and list(t.tree_degree) == [1, 2, 2, 1]

    @pytest.mark.parametrize("tie_break", ["path", "edge"])
    def test_four_cycle_antipode(self, tie_break, gen):
        g = WeightedMultiGraph(4, [0, 1, 2, 3], [1, 2, 3, 0])
        runs = 10**5
        via1 = sum(bfst(g, 0, gen, tie_break).parent[2] == 1 for _ in range(runs))
        assert abs(via1 / runs - 0.5) < three_sigma(0.5, runs)

    def test_hops_equal_networkx_bfs(self, gen):
        g = configuration_model(DegreeLaw.powerlaw(2.7, 1), 5000, WeightLaw("constant"), gen)
        h = nx.MultiGraph()
        h.add_nodes_from(range(g.n))
        h.add_edges_from(zip(g.u.tolist(), g.v.tolist()))
        for src in gen.choice(g.n, 4, replace=False):
            t = bfst(g, int(src), gen)
            ref = nx.single_source_shortest_path_length(h, int(src))
            hops = np.full(g.n, -1)
            hops[list(ref)] = list(ref.values())
            assert np.array_equal(t.hops, hops)
            assert t.tree_degree.sum() == 2 * (t.reached - 1)

    def test_unknown_tie_break(self, gen):
        with pytest.raises(ValueError):
            bfst(triangle(), 0, gen, tie_break="coin")


class TestExcision:
    def test_triangle_target(self):
        assert degree_via_excision(triangle(), 0, 2) == 1
        assert degree_via_excision(triangle(), 0, 1) == 2

    def test_star_centre_from_leaf(self):
        # every other leaf is cut off by the excision, so all count
        g = star(8)
        assert degree_via_excision(g, 3, 0) == 7 == shortest_path_tree(g, 3).tree_degree[0]

    def test_unreachable_target(self):
        g = WeightedMultiGraph(4, [0, 2], [1, 3], [1.0, 1.0])
        assert degree_via_excision(g, 0, 3) == 0

    def test_source_equal_target_rejected(self):
        with pytest.raises(ValueError):
            degree_via_excision(triangle(), 1, 1)

    @pytest.mark.parametrize("law", [DegreeLaw.fixed(4), DegreeLaw.powerlaw(2.5, 1)])
    def test_agrees_with_direct_tree(self, law, gen):
        failures = 0
        for _ in range(100):
            g = configuration_model(law, 500, WeightLaw("exponential"), gen)
            src, tgt = gen.choice(g.n, 2, replace=False)
            t = shortest_path_tree(g, int(src))
            failures += degree_via_excision(g, int(src), int(tgt)) != t.tree_degree[tgt]
        assert failures == 0

    def test_complete_graph(self, gen):
        g = build_complete_graph(60, 0.5, gen)
        t = shortest_path_tree(g, 5)
        assert all(degree_via_excision(g, 5, v) == t.tree_degree[v] for v in range(60) if v != 5)

    def test_display_rule_overcounts_only_through_short_cycles(self, gen):
        # on a dense graph a neighbour can be reached target -> w -> v; the
        # displayed indicator then counts it although (target, v) is no tree edge
        g = build_complete_graph(60, 0.5, 1)
        t = shortest_path_tree(g, 5)
        disp = np.array([degree_via_excision(g, 5, v, rule="display") for v in range(60) if v != 5])
        exact = np.array([degree_via_excision(g, 5, v) for v in range(60) if v != 5])
        assert np.array_equal(exact, np.delete(t.tree_degree, 5))
        assert np.all(disp >= exact) and np.any(disp > exact)

    def test_display_rule_exact_on_sparse_graphs(self, gen):
        g = configuration_model(DegreeLaw.fixed(4), 2000, WeightLaw("exponential"), gen)
        t = shortest_path_tree(g, 0)
        for v in gen.choice(np.arange(1, g.n), 100, replace=False):
            assert degree_via_excision(g, 0, int(v), rule="display") == t.tree_degree[v]

    def test_unknown_rule(self):
        with pytest.raises(ValueError):
            degree_via_excision(triangle(), 0, 2, rule="approx")
