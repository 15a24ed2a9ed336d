"""
Subcritical versus critical decay of the cluster radius.

At p = 0.4 the probability that the origin's cluster reaches distance n
falls off exponentially; at p = 1/2 it falls off like a power. Both curves
come from the same draws.
"""

import warnings

from triperc.experiments import ExperimentSpec, estimate_cluster_tail

warnings.simplefilter("ignore")
res = estimate_cluster_tail(
    ExperimentSpec("cluster_tail", (4, 8, 16, 32), (0.4, 0.5), replicas=20_000))
for p in (0.4, 0.5):
    vals = ", ".join(f"{r.estimate:.5f}" for r in res.select("cluster_tail", p))
    exp_fit = res.fits[f"exponential:cluster_tail@p={p:g}"]
    pow_fit = res.fits[f"power_law:cluster_tail@p={p:g}"]
    print(f"p={p}: {vals}")
    print(f"   semilog R^2 {exp_fit.r_squared:.4f} (rate {-exp_fit.slope:.3f}), "
          f"log-log R^2 {pow_fit.r_squared:.4f} (exponent {pow_fit.slope:.3f})")
