"""
Clusters and crossings on a small box.

Sample a critical configuration, label its open clusters, and check that
exactly one of "open left-right crossing" and "closed top-bottom crossing"
occurs. Run with ``python demos/01_clusters_and_crossings.py``.
"""

from triperc import (Region, sample, label_clusters, lr_open, tb_closed, lr_closed, tb_open)


def show(c):
    # rows printed top to bottom; each row shifted to suggest the triangular embedding
    H, W = c.region.shape
    for iy in reversed(range(H)):
        print(" " * (H - 1 - iy) + " ".join("#" if s else "." for s in c.states[iy]))


r = Region.square(11)
c = sample(r, 0.5, seed=7)
show(c)

labels = label_clusters(c)
print(f"\n{labels.n_clusters} open clusters, largest has {max(labels.sizes)} sites")

print(f"LR open: {lr_open(c)}   TB closed: {tb_closed(c)}")
print(f"TB open: {tb_open(c)}   LR closed: {lr_closed(c)}")
assert lr_open(c) != tb_closed(c)
assert tb_open(c) != lr_closed(c)
print("each pair is exclusive and exhaustive, as planar duality demands")
