"""
Tree degrees on the complete graph
==================================

On the complete graph with i.i.d. Exp(1) edge weights, the degree of a
typical vertex in the shortest-path tree tends to Geometric(1/2). We
check it twice: once through the limit-law sampler and once by building
trees on an actual graph.
"""

import numpy as np

from fpptree.analysis import DegreeDistribution, geometric_pmf, tv_distance
from fpptree.fpp import shortest_path_tree
from fpptree.graphs import build_complete_graph
from fpptree.hatd import sample_hatD_complete
from fpptree.pools import solve_W_complete
from fpptree.stochastic import RngStream

# The limit law needs the martingale limit W, approximated by a pool.
# At s = 1 the pool should look like Exp(1).
pool = solve_W_complete(1.0, pool_size=50_000, rng=RngStream(1, 1))
print(f"W pool: mean {pool.mean():.4f}, sd {pool.samples.std():.4f} (Exp(1): 1, 1)")

# Draws of the limiting tree degree.
hat = sample_hatD_complete(1.0, pool, 200_000, RngStream(1, 2))
oracle = DegreeDistribution.from_samples(hat)
geo = geometric_pmf(0.5, 60)
print(f"oracle mean {hat.mean():.4f}, TV to Geometric(1/2) {tv_distance(oracle, geo):.4f}")

# The same law read off simulated trees, pooled over a few sources.
gen = RngStream(1, 3).generator()
g = build_complete_graph(3000, 1.0, gen)
degs = np.concatenate([shortest_path_tree(g, int(u)).tree_degree for u in gen.choice(g.n, 10, replace=False)])
sim = DegreeDistribution.from_samples(degs)
print(f"simulated (n={g.n}, 10 sources): TV to Geometric(1/2) {tv_distance(sim, geo):.4f}")

print("\n k   simulated   oracle   2^-k")
for k in range(1, 9):
    print(f"{k:2d}   {sim.pmf[k]:.4f}     {oracle.pmf[k]:.4f}   {0.5 ** k:.4f}")
