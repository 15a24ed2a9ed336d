"""
Where the square-crossing curve passes 1/2.

Each replica yields the exact threshold at which its box first crosses, so
a whole curve in p costs one union-find pass. A probit fit then locates
p*(n), which approaches 1/2.
"""

import numpy as np

from triperc.experiments import ExperimentSpec, locate_pc

grid = tuple(np.round(np.arange(0.40, 0.601, 0.02), 2))
res = locate_pc(ExperimentSpec("pc_locate", (8, 16, 32), grid, replicas=3000))
for rec in res.select("pc_star"):
    print(f"p*({rec.n}) = {rec.estimate:.4f}  CI ({rec.ci_lo:.4f}, {rec.ci_hi:.4f})")
for rec in res.select("pc_pair"):
    print(f"curves for {rec.n} cross at {rec.estimate:.4f}")
