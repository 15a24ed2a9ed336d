"""
Exact answers on tiny boxes.

Enumerating every configuration turns crossing probabilities into
polynomials in p. Russo's formula, duality and the critical value 1/2 can
then be checked to machine precision.
"""

from triperc import Region
from triperc.oracle import (endpoint_convention_gap, event_polynomial, exact_expected_pivotal,
                            exact_pc, run_suite)

for n in range(4):
    r = Region.square(n)
    poly = event_polynomial(r, "lr")
    print(f"[0,{n}]^2: P_1/2(LR) = {poly(0.5):.15f}, "
          f"dP/dp(0.5) = {poly.derivative(0.5):.10f}, E N = {exact_expected_pivotal(r, 0.5):.10f}")

print("\ncoefficients of P_p(LR) on [0,2]^2 (number of crossing configurations with k open):")
print(event_polynomial(Region.square(2), "lr").coefficients)
print(f"root of P_p(LR) = 1/2 on [0,3]^2: {exact_pc(Region.square(3)):.15f}")

print("\nendpoint convention, P_1/2(LR) with all path sites open vs endpoints exempt:")
for n in range(4):
    strict, exempt = endpoint_convention_gap(Region.square(n))
    print(f"  n={n}: {strict:.6f} vs {exempt:.6f}")

report = run_suite(9, random_configs=2000, random_n=16)
print(f"\nverification suite on up to 9 sites: {'pass' if report['pass'] else 'FAIL'} "
      f"({len(report['records'])} checks)")
