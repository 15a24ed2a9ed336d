"""
The lowest crossing and the pivotal sites.

The lowest crossing is found by an exploration walk, without looking at
anything above it. Every pivotal site lies on it and carries four
alternating arms. Here both characterizations of pivotality are compared
on one configuration.
"""

from triperc import (Region, lowest_crossing, partition, pivotal_sites_arms,
                     pivotal_sites_flip, count_pivotal, sample, lr_open)

r = Region.square(20)
seed = 0
while not lr_open(c := sample(r, 0.5, seed)):
    seed += 1

gamma = lowest_crossing(c)
part = partition(c, None, gamma)
flip = pivotal_sites_flip(c)
arms = pivotal_sites_arms(c)

H, W = r.shape
path = gamma.sites
for iy in reversed(range(H)):
    row = []
    for ix in range(W):
        v = (ix, iy)
        row.append("P" if v in flip else "*" if v in path else "#" if c.states[iy, ix] else ".")
    print(" " * (H - 1 - iy) + " ".join(row))

print(f"\nseed {seed}: lowest crossing has {len(gamma)} sites, "
      f"{len(part.bottom_interior)} sites below it, {len(part.top_interior)} above")
print(f"pivotal by flipping: {len(flip)}, by four arms: {len(arms)}, "
      f"by the linear sweep: {count_pivotal(c)}")
assert flip == arms and flip <= path
