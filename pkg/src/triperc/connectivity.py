"""
Clusters and crossing events.

Crossings follow the all-colored convention: a left-right crossing of color
``k`` is a path of ``k``-colored sites from a site of the left column to a
site of the right column, endpoints included. With this convention every
configuration of a box has exactly one of a left-right open crossing and a
top-bottom closed crossing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DomainError
from .lattice import CLOSED, OPEN, Configuration, Region, Site

LR = "lr"
TB = "tb"


@dataclass(frozen=True)
class ClusterLabeling:
    """Cluster identifiers of the sites of one color.

    ``labels[iy, ix]`` is the cluster index of the site (``-1`` for sites of
    the other color); clusters are numbered in row-major order of their first
    site and ``sizes[k]`` is the number of sites of cluster ``k``.
    """

    region: Region
    color: int
    labels: np.ndarray
    sizes: np.ndarray

    @property
    def n_clusters(self) -> int:
        return len(self.sizes)

    def label_of(self, v) -> int:
        return int(self.labels[self.region.local(v)])

    def size_of(self, v) -> int:
        k = self.label_of(v)
        return 0 if k < 0 else int(self.sizes[k])

    def same_cluster(self, u, v) -> bool:
        a, b = self.label_of(u), self.label_of(v)
        return a >= 0 and a == b

    def cluster(self, k: int) -> set[Site]:
        return self.region.sites_of(self.labels == k)


@dataclass(frozen=True)
class CrossingQuery:
    region: Region
    direction: str = LR
    color: int = OPEN

    def __post_init__(self):
        if self.direction not in (LR, TB):
            raise DomainError(f"direction must be {LR!r} or {TB!r}")
        if self.color not in (OPEN, CLOSED):
            raise DomainError("color must be OPEN (1) or CLOSED (0)")


def label_clusters(c: Configuration, color: int = OPEN) -> ClusterLabeling:
    labels, sizes = _kernels.label(c.states, color)
    return ClusterLabeling(c.region, color, labels, sizes)


def _states_on(c: Configuration, region: Region | None) -> np.ndarray:
    if region is None or region == c.region:
        return c.states
    return c.restrict(region).states


def has_crossing(c: Configuration, q: CrossingQuery) -> bool:
    """Whether the crossing event described by `q` occurs in `c`.

    ``q.region`` may be a sub-box of the configuration's region.
    """
    states = _states_on(c, q.region)
    return bool(_kernels.has_crossing(states, q.color, q.direction == TB))


def lr_open(c: Configuration, region: Region | None = None) -> bool:
    return bool(_kernels.has_crossing(_states_on(c, region), OPEN, False))


def tb_open(c: Configuration, region: Region | None = None) -> bool:
    return bool(_kernels.has_crossing(_states_on(c, region), OPEN, True))


def lr_closed(c: Configuration, region: Region | None = None) -> bool:
    return bool(_kernels.has_crossing(_states_on(c, region), CLOSED, False))


def tb_closed(c: Configuration, region: Region | None = None) -> bool:
    return bool(_kernels.has_crossing(_states_on(c, region), CLOSED, True))


def lr_open_endpoint_exempt(c: Configuration, region: Region | None = None) -> bool:
    """Left-right crossing whose two endpoints may have either state.

    Equivalent to an ordinary open crossing after forcing the left and right
    columns open, since a path may always be cut at its last left-column and
    first right-column site.
    """
    states = np.array(_states_on(c, region))
    states[:, 0] = OPEN
    states[:, -1] = OPEN
    return bool(_kernels.has_crossing(states, OPEN, False))


def radius_reached(c: Configuration, v, r: Region | None = None) -> bool:
    """Whether `v` is open and its open cluster inside `r` meets the boundary of `r`."""
    r = c.region if r is None else r
    r.check(v)
    states = _states_on(c, r)
    iy, ix = r.local(v)
    _, boundary, _ = _kernels.cluster_extent(states, iy, ix)
    return bool(boundary)


def cluster_size_at(c: Configuration, v) -> int:
    """Size of the open cluster of `v` within the region; 0 if `v` is closed."""
    iy, ix = c.region.local(v)
    size, _, _ = _kernels.cluster_extent(c.states, iy, ix)
    return int(size)


def cluster_radius(c: Configuration, v) -> int:
    """Largest sup-norm distance from `v` reached by its open cluster (-1 if closed)."""
    iy, ix = c.region.local(v)
    _, _, radius = _kernels.cluster_extent(c.states, iy, ix)
    return int(radius)


def closed_circuit_in_annulus(c: Configuration, inner: Region, outer: Region) -> bool:
    """Whether a closed circuit in ``outer \\ inner`` separates `inner` from the outer boundary.

    Decided by separation: no open path inside the annulus joins a site
    adjacent to `inner` to the boundary of `outer`. On the triangular lattice
    this is equivalent to the existence of a surrounding closed circuit.
    """
    if not outer.strictly_contains(inner):
        raise DomainError(f"{inner} must lie strictly inside {outer}")
    if not c.region.contains_region(outer):
        raise DomainError(f"{outer} is not inside the configuration region")
    states = np.array(_states_on(c, outer))
    r0, c0 = outer.local((inner.x_min, inner.y_min))
    inner_mask = np.zeros(outer.shape, dtype=bool)
    inner_mask[r0:r0 + inner.height, c0:c0 + inner.width] = True
    states[inner_mask] = 2  # neither color: excluded from clustering
    labels, _ = _kernels.label(states, OPEN)
    # sites of the annulus adjacent to the inner box
    near = np.zeros(outer.shape, dtype=bool)
    for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1)):
        near |= np.roll(np.roll(inner_mask, dy, axis=0), dx, axis=1)
    near &= ~inner_mask
    edge = np.zeros(outer.shape, dtype=bool)
    edge[0, :] = edge[-1, :] = edge[:, 0] = edge[:, -1] = True
    near_labels = set(labels[near & (labels >= 0)].tolist())
    edge_labels = set(labels[edge & (labels >= 0)].tolist())
    return not (near_labels & edge_labels)
