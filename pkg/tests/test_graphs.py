import numpy as np
import pytest
from scipy.spatial.distance import squareform

from conftest import three_sigma
from fpptree.graphs import (
    CompleteGraph, DegreeSequence, ResourceCapError, WeightedMultiGraph, attach_weights,
    build_complete_graph, build_configuration_model, configuration_model, draw_degree_sequence,
    read_degree_sequence, read_edge_list, write_degree_sequence, write_edge_list,
)
from fpptree.stochastic import DegreeLaw, WeightLaw


class TestDegreeSequence:
    def test_fixed_even_total(self, gen):
        seq = draw_degree_sequence(DegreeLaw.fixed(3), 4, gen)
        assert list(seq.d) == [3, 3, 3, 3] and seq.total == 12 and not seq.parity_fixed

    def test_parity_fix_increments_one_entry(self, gen):
        seq = draw_degree_sequence(DegreeLaw.fixed(1), 3, gen)
        assert seq.total == 4 and sorted(seq.d) == [1, 1, 2] and seq.parity_fixed

    def test_parity_fix_is_uniform(self, gen):
        hits = np.zeros(3)
        for _ in range(3000):
            hits[np.argmax(draw_degree_sequence(DegreeLaw.fixed(1), 3, gen).d)] += 1
        assert np.all(np.abs(hits / 3000 - 1 / 3) < three_sigma(1 / 3, 3000))

    def test_powerlaw_minimum(self, gen):
        assert draw_degree_sequence(DegreeLaw.powerlaw(3.5, 5), 10**5, gen).d.min() >= 5

    def test_needs_two_vertices(self, gen):
        with pytest.raises(ValueError):
            draw_degree_sequence(DegreeLaw.fixed(2), 1, gen)


class TestConfigurationModel:
    def test_single_edge(self, gen):
        g = build_configuration_model(np.array([1, 1]), gen)
        assert g.num_edges == 1 and {int(g.u[0]), int(g.v[0])} == {0, 1}

    def test_matching_uniformity_on_two_loops(self, gen):
        # half-edges a1 a2 (vertex 0), b1 b2 (vertex 1): of the three perfect
        # matchings exactly one is {a1a2, b1b2}
        trials = 10**5
        loops = 0
        for _ in range(trials):
            g = build_configuration_model(np.array([2, 2]), gen)
            loops += bool(np.all(g.u == g.v))
        assert abs(loops / trials - 1 / 3) < three_sigma(1 / 3, trials)

    @pytest.mark.parametrize("r", [1, 3, 4, 7])
    def test_realises_degree_sequence(self, r, gen):
        seq = draw_degree_sequence(DegreeLaw.fixed(r), 1000, gen)
        g = build_configuration_model(seq, gen)
        assert np.array_equal(g.degrees(), seq.d)

    def test_random_sequence_realised_with_loops_counted_twice(self, gen):
        seq = draw_degree_sequence(DegreeLaw.powerlaw(2.5, 1), 5000, gen)
        g = build_configuration_model(seq, gen)
        assert np.array_equal(g.degrees(), seq.d)
        assert g.degrees().sum() == 2 * g.num_edges
        assert g.has_self_loops and g.has_multi_edges

    def test_rejects_odd_total(self, gen):
        with pytest.raises(ValueError):
            build_configuration_model(DegreeSequence(np.array([1, 2])), gen)


class TestWeights:
    def test_constant(self, gen):
        g = attach_weights(build_configuration_model(np.full(10, 3)[:-1].tolist() + [1], gen),
                           WeightLaw("constant"), gen)
        assert np.all(g.w == 1)

    @pytest.mark.parametrize("law, mean, tol", [
        (WeightLaw("exponential"), 1.0, 0.01),
        (WeightLaw("powered_exponential", 2.0), 2.0, 0.02),
    ])
    def test_mean_over_many_edges(self, law, mean, tol, gen):
        g = configuration_model(DegreeLaw.fixed(4), 500_000, law, gen)
        assert g.num_edges == 10**6
        assert np.all(g.w > 0)
        assert abs(g.w.mean() - mean) < tol

    def test_every_copy_gets_its_own_weight(self, gen):
        g = attach_weights(build_configuration_model(np.array([4]), gen), WeightLaw("exponential"), gen)
        assert g.num_edges == 2 and g.w[0] != g.w[1]

    def test_nonpositive_weights_rejected(self):
        with pytest.raises(ValueError):
            WeightedMultiGraph(2, [0], [1], [0.0])


class TestCompleteGraph:
    def test_three_vertices(self, gen):
        g = build_complete_graph(3, 1.0, gen)
        assert g.num_edges == 3 and not g.has_self_loops and not g.has_multi_edges
        assert list(g.degrees()) == [2, 2, 2]

    def test_default_cap(self, gen):
        with pytest.raises(ResourceCapError, match="lower n"):
            build_complete_graph(20_000, 1.0, gen)

    def test_cap_can_be_raised(self, gen):
        with pytest.raises(ResourceCapError):
            build_complete_graph(100, 1.0, gen, max_edges=4000)
        assert build_complete_graph(100, 1.0, gen, max_edges=4950).num_edges == 4950

    def test_scaled_minimum_incident_weight(self, gen):
        # min of n-1 unit exponentials is Exp(n-1); n * min has mean n/(n-1)
        n = 1000
        vals = []
        for _ in range(5):
            sq = build_complete_graph(n, 1.0, gen).square()
            vals.append(n * sq.min(axis=1))
        assert abs(np.mean(vals) - n / (n - 1)) < 0.05

    def test_condensed_indexing_matches_squareform(self, gen):
        g = build_complete_graph(7, 2.0, gen)
        full = squareform(g.w)
        for a in range(7):
            row = g.row(a)
            assert np.isinf(row[a])
            assert np.array_equal(np.delete(row, a), np.delete(full[a], a))
        a, b = g.endpoints(np.arange(g.num_edges))
        assert np.all(a < b) and np.array_equal(g.edge_id(b, a), np.arange(g.num_edges))
        m = g.to_multigraph()
        assert np.array_equal(m.degrees(), g.degrees())

    def test_weights_are_powered_exponentials(self, gen):
        g = build_complete_graph(1500, 0.5, gen)
        # E[E^0.5] = Gamma(1.5) = sqrt(pi)/2
        assert abs(g.w.mean() - np.sqrt(np.pi) / 2) < 0.005

    def test_wrong_length_rejected(self):
        with pytest.raises(ValueError):
            CompleteGraph(4, np.ones(5))


class TestEdgeListFormat:
    def test_empty_graph(self, tmp_path):
        g = WeightedMultiGraph(0, [], [], [])
        write_edge_list(g, tmp_path / "e.txt")
        h = read_edge_list(tmp_path / "e.txt")
        assert h.n == 0 and h.num_edges == 0

    def test_self_loop(self, tmp_path):
        write_edge_list(WeightedMultiGraph(1, [0], [0], [1.5]), tmp_path / "e.txt")
        h = read_edge_list(tmp_path / "e.txt")
        assert (h.n, int(h.u[0]), int(h.v[0]), h.w[0]) == (1, 0, 0, 1.5)

    def test_large_round_trip_is_bit_identical(self, tmp_path, gen):
        g = configuration_model(DegreeLaw.fixed(4), 500_000, WeightLaw("powered_exponential", 0.7), gen)
        write_edge_list(g, tmp_path / "e.txt")
        h = read_edge_list(tmp_path / "e.txt")
        assert h.n == g.n
        assert np.array_equal(h.u, g.u) and np.array_equal(h.v, g.v)
        assert np.array_equal(h.w, g.w)

    def test_isolated_trailing_vertices_kept(self, tmp_path):
        write_edge_list(WeightedMultiGraph(5, [0], [1], [2.0]), tmp_path / "e.txt")
        assert read_edge_list(tmp_path / "e.txt").n == 5

    def test_malformed_line_reports_position(self, tmp_path):
        f = tmp_path / "e.txt"
        f.write_text("# n=3\n0 1 0.5\n1 2\n")
        with pytest.raises(ValueError, match=":3:"):
            read_edge_list(f)
        f.write_text("0 1 abc\n")
        with pytest.raises(ValueError, match=":1:"):
            read_edge_list(f)

    def test_degree_sequence_round_trip(self, tmp_path):
        write_degree_sequence([3, 1, 2], tmp_path / "d.txt")
        assert list(read_degree_sequence(tmp_path / "d.txt").d) == [3, 1, 2]
