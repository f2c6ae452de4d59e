import math

import numpy as np
import pytest
from scipy import stats

from fpptree.limits import phi_W_regular, prob_M_lt, solve_malthusian
from fpptree.pools import (
    PointBudgetExceeded, PoolDiagnosticError, SamplePool, _min_recursion_step, complete_tail_bound, sample_V_series, series_pool, solve_V,
    solve_W_cm, solve_W_complete,
)
from fpptree.stochastic import DegreeLaw, RngStream, WeightLaw

EXP = WeightLaw("exponential")


class TestCompletePool:
    def test_exponential_at_s_one_from_constant_start(self):
        pool = solve_W_complete(1.0, 100_000, rng=RngStream(5, 3), init="constant")
        assert pool.converged
        assert stats.kstest(pool.samples, "expon").statistic < 0.01
        assert abs(pool.mean() - 1) < 0.01

    @pytest.mark.parametrize("s", [0.5, 2.0])
    def test_mean_one(self, s):
        pool = solve_W_complete(s, 200_000, rng=RngStream(6, 3))
        assert abs(pool.mean() - 1) < 0.01
        assert np.all(pool.samples >= 0)
        pool.check(0.01)

    def test_prob_M_below_zero(self):
        pool = solve_W_complete(1.0, 100_000, rng=RngStream(7, 3))
        assert abs(prob_M_lt(0.0, pool.samples) - 0.5) < 0.01

    def test_fixed_point_stability(self):
        pool = solve_W_complete(2.0, 40_000, rng=RngStream(8, 3))
        noise = 1.22 * math.sqrt(2 / pool.size)
        assert pool.history[-1] < 2 * noise

    def test_truncation_bound_small(self):
        assert 0 < complete_tail_bound(1.0, 1e-8) < 1e-7
        assert complete_tail_bound(1.0, 1e-8) == pytest.approx(1e-8, rel=1e-6)


    def test_sweep_budget_is_enforced(self):
        # at small s the truncation cut holds millions of points per member
        with pytest.raises(PointBudgetExceeded):
            solve_W_complete(0.05, 1000, rng=0)


class TestConfigurationPool:
    def test_three_regular_gamma_transform_from_constant_start(self):
        pool = solve_W_cm(DegreeLaw.fixed(3), EXP, 1.0, 100_000, rng=RngStream(9, 3), init="constant")
        u = np.array([0.5, 1.0, 2.0])
        assert np.all(np.abs(pool.laplace(u) - phi_W_regular(u, 3)) < 0.01)
        assert abs(pool.mean() - 1) < 0.01

    @pytest.mark.parametrize("degrees, weights", [
        (DegreeLaw.fixed(4), WeightLaw("uniform")),
        (DegreeLaw.powerlaw(4.5, 3), EXP),
        (DegreeLaw.explicit({3: 0.5, 6: 0.5}), WeightLaw("powered_exponential", 2.0)),
    ])
    def test_mean_one(self, degrees, weights):
        pool = solve_W_cm(degrees, weights, pool_size=50_000, rng=RngStream(10, 3))
        assert abs(pool.mean() - 1) < 0.01
        assert float(pool.meta["lam"]) == pytest.approx(solve_malthusian(degrees.nu, weights))

    def test_heavy_tailed_W_needs_a_larger_pool(self):
        # E D^3 = inf: W has infinite variance and most mass near 0, so the
        # pool mean is resolved only to a few percent
        pool = solve_W_cm(DegreeLaw.powerlaw(3.5, 2), EXP, pool_size=200_000, rng=RngStream(11, 3))
        assert np.median(pool.samples) < 0.05
        assert abs(pool.mean() - 1) < 0.05

    def test_drift_is_reported(self):
        with pytest.raises(PoolDiagnosticError):
            solve_W_cm(DegreeLaw.powerlaw(3.05, 2), EXP, pool_size=2000, iters=60, tol=0, rng=0)

    def test_unit_weights_are_degenerate_on_regular_graphs(self):
        pool = solve_W_cm(DegreeLaw.fixed(3), WeightLaw("constant"), pool_size=1000, rng=1)
        assert np.allclose(pool.samples, 1.0)

    def test_critical_rejected(self):
        with pytest.raises(ValueError):
            solve_W_cm(DegreeLaw.fixed(2), EXP, pool_size=100)
        with pytest.raises(ValueError):
            solve_W_cm(DegreeLaw.fixed(2), EXP, lam=1.0, pool_size=100)

    def test_extinction_atoms(self):
        # D in {1, 3}: the branching process dies out with positive probability
        pool = solve_W_cm(DegreeLaw.explicit({1: 0.5, 3: 0.5}), EXP, pool_size=50_000, rng=RngStream(2, 3))
        assert 0 < np.mean(pool.samples == 0) < 1
        assert abs(pool.mean() - 1) < 0.02


class TestVPool:
    LAW = DegreeLaw.powerlaw(2.5, 5)

    def test_min_recursion_step_is_exact(self, gen):
        pool = np.array([0.1, 0.5, 2.0])
        n = 3
        exact = _min_recursion_step(pool, np.full(200_000, float(n)), 1.0 - gen.random(200_000))
        brute = (gen.standard_exponential((200_000, n)) + pool[gen.integers(0, 3, (200_000, n))]).min(axis=1)
        assert stats.ks_2samp(exact, brute).statistic < 0.01

    def test_two_representations_agree(self):
        a = solve_V(self.LAW, 100_000, rng=RngStream(3, 3))
        b = series_pool(self.LAW, 100_000, rng=RngStream(3, 4))
        assert stats.ks_2samp(a.samples, b.samples).statistic < 0.02
        assert np.all(a.samples > 0) and np.all(b.samples > 0)
        a.check()
        b.check()

    def test_fixed_point(self):
        pool = solve_V(self.LAW, 50_000, rng=RngStream(4, 3))
        assert pool.converged and pool.history[-1] < 0.02

    def test_series_truncation(self, gen):
        v, terms = sample_V_series(self.LAW, 2000, gen, cutoff=1e3)
        v2, terms2 = sample_V_series(self.LAW, 2000, gen, cutoff=1e9)
        assert terms.mean() < terms2.mean()
        assert abs(v.mean() - v2.mean()) < 0.1

    @pytest.mark.parametrize("law", [DegreeLaw.powerlaw(3.5, 2), DegreeLaw.fixed(4),
                                     DegreeLaw.powerlaw(2.5, 1)])
    def test_rejects_laws_outside_regime(self, law):
        with pytest.raises(ValueError):
            solve_V(law, 100)


class TestPoolFiles:
    def test_round_trip(self, tmp_path):
        pool = solve_W_complete(1.0, 2000, iters=5, rng=1)
        pool.meta["seed"] = 1
        pool.write(tmp_path / "p.txt")
        back = SamplePool.read(tmp_path / "p.txt")
        assert back.target == "W_complete" and back.generation == pool.generation
        assert np.array_equal(back.samples, pool.samples)
        assert back.meta["s"] == "1.0" and back.meta["seed"] == "1"
        head = (tmp_path / "p.txt").read_text().splitlines()[:4]
        assert head[0] == "# target=W_complete" and head[1] == "# size=2000"

    def test_bad_value_reports_line(self, tmp_path):
        f = tmp_path / "p.txt"
        f.write_text("# target=V\n0.5\nxyz\n")
        with pytest.raises(ValueError, match=":3:"):
            SamplePool.read(f)

    def test_missing_target(self, tmp_path):
        f = tmp_path / "p.txt"
        f.write_text("0.5\n")
        with pytest.raises(ValueError, match="target"):
            SamplePool.read(f)

    def test_contract_checks(self):
        with pytest.raises(RuntimeError):
            SamplePool(np.array([-1.0, 3.0]), "W_CM").check()
        with pytest.raises(PoolDiagnosticError):
            SamplePool(np.array([2.0, 2.0]), "W_CM").check(0.1)
        with pytest.raises(PoolDiagnosticError):
            SamplePool(np.array([0.0, 1.0]), "V").check()
        with pytest.raises(ValueError):
            SamplePool(np.ones(2), "X")
