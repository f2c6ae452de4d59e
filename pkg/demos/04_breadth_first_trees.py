"""
Breadth-first trees on regular graphs
=====================================

With all weights equal to 1 the tree is a breadth-first tree with random
tie-breaking. On a random r-regular graph its degree law is explicit. For
r = 3 it is uniform on {1, 2, 3}.
"""

import numpy as np

from fpptree.analysis import DegreeDistribution, tv_distance
from fpptree.fpp import bfst
from fpptree.graphs import configuration_model
from fpptree.limits import bfst_limit_pmf, gf_hatD_deterministic_weights
from fpptree.stochastic import DegreeLaw, RngStream, WeightLaw

for r in (3, 4, 10):
    a = bfst_limit_pmf(r)
    print(f"r={r:2d}: a_k = {np.array2string(a[:5], precision=4)}{' ...' if r > 5 else ''}  sum {a.sum():.12f}")

# The generating function by quadrature agrees with the explicit series.
law = DegreeLaw.fixed(3)
for z in (0.25, 0.5, 0.75):
    series = np.dot(bfst_limit_pmf(3), z ** np.arange(1, 4))
    print(f"E z^D at z={z}: quadrature {gf_hatD_deterministic_weights(law, z):.10f}, series {series:.10f}")

# A simulated breadth-first tree on a random 3-regular graph.
gen = RngStream(5, 1).generator()
g = configuration_model(law, 20_000, WeightLaw("constant"), gen)
degs = np.concatenate([bfst(g, int(u), gen).tree_degree for u in gen.choice(g.n, 5, replace=False)])
sim = DegreeDistribution.from_samples(degs)
print(f"simulated pmf {np.round(sim.pmf[1:4], 4)}; TV to uniform {tv_distance(sim, [0, 1/3, 1/3, 1/3]):.4f}")
