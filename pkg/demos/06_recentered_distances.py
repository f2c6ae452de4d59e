"""
Typical distances on the complete graph
=======================================

At s = 1, ``n C_n(u, v) - log n`` has a limit law with mean equal to
Euler's constant. Its shape should not move between sizes.
"""

import numpy as np

from fpptree.analysis import recentered_path_lengths, recentering_check
from fpptree.stochastic import RngStream

samples = {n: recentered_path_lengths(n, 1.0, graphs=4, sources=250, targets=20, rng=RngStream(7, 1, (n,)))
           for n in (500, 2000)}
chk = recentering_check(samples)
print(f"KS between n=500 and n=2000: {chk.ks_consecutive[0]:.4f}")
print(f"mean at n=2000: {chk.mean:.4f} +- {chk.mean_stderr:.4f} (Euler's constant {np.euler_gamma:.4f})")
