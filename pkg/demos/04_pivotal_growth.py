"""
Pivotal sites grow polynomially at criticality.

Conditioned on a left-right crossing of [0,n]^2 at p = 1/2, the expected
number of pivotal sites grows like a power of n. A few thousand replicas
are enough to see the exponent clearly.
"""

from triperc.experiments import ExperimentSpec, estimate_conditional_pivotal

spec = ExperimentSpec("conditional_pivotal", (8, 16, 32, 64), (0.5,), replicas=4000)
res = estimate_conditional_pivotal(spec)
for rec in res.select("conditional_pivotal"):
    print(f"n={rec.n:3d}  E(N | LR) = {rec.estimate:7.3f}  "
          f"95% CI ({rec.ci_lo:.3f}, {rec.ci_hi:.3f})  accepted {rec.accepted}")
fit = res.fits["power_law:conditional_pivotal@p=0.5"]
print(f"power law exponent {fit.slope:.3f}, CI ({fit.slope_ci[0]:.3f}, {fit.slope_ci[1]:.3f})")
