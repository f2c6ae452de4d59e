"""Property-based checks of invariants that hold for every input."""
import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fpptree.analysis import DegreeDistribution, tv_distance
from fpptree.fpp import degree_via_excision, shortest_path_tree
from fpptree.graphs import WeightedMultiGraph
from fpptree.limits import bfst_limit_pmf
from fpptree.stochastic import DegreeLaw, ppp_from_exponentials, stratified_uniforms

SETTINGS = settings(max_examples=60, deadline=None)


@st.composite
def random_graphs(draw):
    n = draw(st.integers(2, 25))
    m = draw(st.integers(0, 60))
    seed = draw(st.integers(0, 2**32 - 1))
    gen = np.random.default_rng(seed)
    u = gen.integers(0, n, m)
    v = gen.integers(0, n, m)
    return WeightedMultiGraph(n, u, v, gen.exponential(size=m) + 1e-12)


@SETTINGS
@given(random_graphs(), st.data())
def test_tree_handshake(g, data):
    src = data.draw(st.integers(0, g.n - 1))
    t = shortest_path_tree(g, src)
    assert t.tree_degree.sum() == 2 * (t.reached - 1)
    assert np.all(t.tree_degree[~t.reached_mask] == 0)
    # distances never decrease along extraction order
    assert np.all(np.diff(t.dist[t.order]) >= 0)


@SETTINGS
@given(random_graphs(), st.data())
def test_excision_matches_direct_degree(g, data):
    src = data.draw(st.integers(0, g.n - 1))
    t = shortest_path_tree(g, src)
    for target in t.order[1:4]:
        assert degree_via_excision(g, src, int(target)) == t.tree_degree[target]


@SETTINGS
@given(arrays(float, st.integers(1, 50), elements=st.floats(1e-6, 10)), st.floats(0.05, 10))
def test_ppp_points_increase(spacings, s):
    x = ppp_from_exponentials(spacings, s)
    assert np.all(np.diff(x) > 0)
    assert np.all(x > 0)


@SETTINGS
@given(arrays(np.int64, st.integers(1, 300), elements=st.integers(0, 40)))
def test_empirical_pmf_invariants(x):
    d = DegreeDistribution.from_samples(x)
    assert abs(d.pmf.sum() - 1) < 1e-12
    assert d.ccdf[0] == 1.0 or abs(d.ccdf[0] - 1) < 1e-12
    assert np.all(np.diff(d.ccdf) <= 1e-15)
    assert abs(d.mean() - x.mean()) < 1e-9
    assert tv_distance(d, d) == 0.0


@SETTINGS
@given(arrays(float, 6, elements=st.floats(0, 1)), arrays(float, 9, elements=st.floats(0, 1)))
def test_tv_is_a_bounded_symmetric_distance(a, b):
    if a.sum() == 0 or b.sum() == 0:
        return
    a, b = a / a.sum(), b / b.sum()
    d = tv_distance(a, b)
    assert 0.0 <= d <= 1.0
    assert d == tv_distance(b, a)


@SETTINGS
@given(st.integers(3, 400))
def test_bfst_pmf_sums_to_one(r):
    a = bfst_limit_pmf(r)
    assert abs(a.sum() - 1) < 1e-10
    assert np.all(a > 0)


@SETTINGS
@given(st.integers(1, 5000), st.integers(0, 2**32 - 1))
def test_stratified_uniforms_cover_each_stratum_once(size, seed):
    u = stratified_uniforms(size, np.random.default_rng(seed))
    assert u.shape == (size,)
    np.testing.assert_array_equal(np.sort(np.floor(u * size)), np.arange(size))


@settings(max_examples=15, deadline=None)
@given(st.floats(2.1, 4.0), st.integers(1, 6))
def test_powerlaw_pmf_normalised(tau, d_min):
    law = DegreeLaw.powerlaw(tau, d_min)
    assert abs(law.pmf.sum() - 1) < 1e-12
    assert law.support.min() == d_min
