"""
How fast hubs are detected
==========================

A vertex of degree k misses ``k - D_hat_k`` of its edges in the tree.
With exponential weights the deficit grows like ``k^(1 - 1/lambda)``,
where lambda is the Malthusian rate. At lambda = 1 that exponent is 0
and the growth is logarithmic.
"""

from fpptree.experiments import ExperimentConfig, rate_of_conv

for law, label in (("fixed:4", "lambda = 2"), ("fixed:3", "lambda = 1")):
    cfg = ExperimentConfig(experiment="rate-of-conv", degree_law=law, k_grid="64,128,256,512,1024,2048,4096",
                           draws_per_k=2000, pool_size=50_000, seed=4)
    res = rate_of_conv(cfg)
    print(f"\n{label} ({law}, exponential weights)")
    for k, deficit, se, med in res.tables["deficit"].rows:
        print(f"  k={int(k):5d}  mean deficit {deficit:8.2f} +- {se:.2f}   median(M_k - log k) {med:+.3f}")
    print(f"  fitted exponent {res.value('alpha_hat'):.3f} (theory {res.value('alpha_theory'):.3f}); "
          f"log model preferred: {bool(res.value('log_model_wins'))}")
