"""
Infinite-variance degrees
=========================

For power laws with 2 < tau < 3 the branching process explodes in finite
time V. The law of V solves a min-type equation; it can also be written
as a random series. A hub keeps a fixed fraction p of its edges, where p
is the chance that an explosion time beats an independent Exp(1).
"""

from fpptree.analysis import ks_statistic
from fpptree.hatd import estimate_p, sample_hatD_cm_infinite, sample_hatDk_cm_infinite
from fpptree.pools import series_pool, solve_V
from fpptree.stochastic import DegreeLaw, RngStream

law = DegreeLaw.powerlaw(2.5, 5)
v_min = solve_V(law, 50_000, rng=RngStream(6, 1))
v_series = series_pool(law, 50_000, rng=RngStream(6, 2))
print(f"V by population dynamics vs by series: KS {ks_statistic(v_min.samples, v_series.samples):.4f}")

p = estimate_p(v_min, 200_000, RngStream(6, 3))
print(f"p = P(V > E) = {p:.4f}")
for i, k in enumerate((10, 100, 1000, 10_000)):
    ratio = sample_hatDk_cm_infinite(k, v_min, 2000, RngStream(6, 4, (i,))).mean() / k
    print(f"  k={k:6d}: mean(D_hat_k)/k = {ratio:.4f}")

hat = sample_hatD_cm_infinite(law, v_min, 200_000, RngStream(6, 5))
print(f"mean tree degree {hat.mean():.4f} (a tree has mean degree 2)")
