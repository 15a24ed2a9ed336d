"""
Triangular lattice on Z^2, rectangular regions and Bernoulli configurations.

The triangular lattice is realized on the integer grid: a site ``(x, y)`` is
adjacent to ``(x +- 1, y)``, ``(x, y +- 1)``, ``(x + 1, y - 1)`` and
``(x - 1, y + 1)``. Geometrically this is the embedding with basis vectors
``e1 = (1, 0)`` and ``e2 = (1/2, sqrt(3)/2)``, so a box ``[0, n]^2`` is a
60 degree rhombus.

Site states are stored row-major: ``states[y - y_min, x - x_min]``, with
``1`` meaning open and ``0`` closed. The flat index of a site is therefore
``(y - y_min) * width + (x - x_min)``; the exhaustive enumeration in
:mod:`triperc.oracle` uses the same index as the bit position.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

from .errors import DomainError

OPEN = 1
CLOSED = 0

#: Neighbor displacements in their documented, fixed order.
OFFSETS = ((1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1))

SIDES = ("left", "right", "top", "bottom")


class Site(NamedTuple):
    x: int
    y: int


def neighbors(v) -> list[Site]:
    """Return the six lattice neighbors of `v` in the order of `OFFSETS`.

    >>> neighbors((0, 0))[:3]
    [Site(x=1, y=0), Site(x=-1, y=0), Site(x=0, y=1)]
    """
    x, y = v
    return [Site(x + dx, y + dy) for dx, dy in OFFSETS]


def is_adjacent(u, v) -> bool:
    return (v[0] - u[0], v[1] - u[1]) in OFFSETS


@dataclass(frozen=True)
class Region:
    """Closed integer box ``[x_min, x_max] x [y_min, y_max]``.

    The four boundary segments are the extreme columns (``left``, ``right``)
    and rows (``bottom``, ``top``); corner sites belong to both incident
    segments.
    """

    x_min: int
    x_max: int
    y_min: int
    y_max: int

    def __post_init__(self):
        if self.x_min > self.x_max or self.y_min > self.y_max:
            raise ValueError(f"empty region {self!r}")

    @classmethod
    def square(cls, n: int) -> "Region":
        """The box ``[0, n]^2``."""
        return cls(0, n, 0, n)

    @classmethod
    def centered(cls, n: int) -> "Region":
        """The box ``[-n, n]^2``."""
        return cls(-n, n, -n, n)

    @classmethod
    def rectangle(cls, width: int, height: int) -> "Region":
        """The box ``[0, width] x [0, height]``."""
        return cls(0, width, 0, height)

    @property
    def width(self) -> int:
        return self.x_max - self.x_min + 1

    @property
    def height(self) -> int:
        return self.y_max - self.y_min + 1

    @property
    def shape(self) -> tuple[int, int]:
        """Array shape ``(height, width)`` of the state grid."""
        return (self.height, self.width)

    @property
    def size(self) -> int:
        return self.width * self.height

    def __contains__(self, v) -> bool:
        x, y = v
        return self.x_min <= x <= self.x_max and self.y_min <= y <= self.y_max

    def __len__(self) -> int:
        return self.size

    def contains_region(self, other: "Region") -> bool:
        return (self.x_min <= other.x_min and other.x_max <= self.x_max
                and self.y_min <= other.y_min and other.y_max <= self.y_max)

    def strictly_contains(self, other: "Region") -> bool:
        """True if `other` lies in the interior of this box."""
        return (self.x_min < other.x_min and other.x_max < self.x_max
                and self.y_min < other.y_min and other.y_max < self.y_max)

    def sites(self) -> list[Site]:
        """All sites in row-major order."""
        return [Site(x, y)
                for y in range(self.y_min, self.y_max + 1)
                for x in range(self.x_min, self.x_max + 1)]

    def index(self, v) -> int:
        """Row-major flat index of site `v`."""
        self.check(v)
        return (v[1] - self.y_min) * self.width + (v[0] - self.x_min)

    def site(self, index: int) -> Site:
        iy, ix = divmod(index, self.width)
        return Site(self.x_min + ix, self.y_min + iy)

    def local(self, v) -> tuple[int, int]:
        """Array index ``(row, column)`` of site `v`."""
        self.check(v)
        return (v[1] - self.y_min, v[0] - self.x_min)

    def check(self, v) -> None:
        if v not in self:
            raise DomainError(f"site {tuple(v)} is outside {self}")

    def neighbors(self, v) -> list[Site]:
        """Neighbors of `v` that lie in the region, in `OFFSETS` order."""
        self.check(v)
        return [w for w in neighbors(v) if w in self]

    def boundary(self, side: str) -> list[Site]:
        """Sites of one boundary segment, ordered by increasing coordinate."""
        if side == "left":
            return [Site(self.x_min, y) for y in range(self.y_min, self.y_max + 1)]
        if side == "right":
            return [Site(self.x_max, y) for y in range(self.y_min, self.y_max + 1)]
        if side == "bottom":
            return [Site(x, self.y_min) for x in range(self.x_min, self.x_max + 1)]
        if side == "top":
            return [Site(x, self.y_max) for x in range(self.x_min, self.x_max + 1)]
        raise ValueError(f"unknown side {side!r}; expected one of {SIDES}")

    def boundary_sites(self) -> set[Site]:
        out: set[Site] = set()
        for side in SIDES:
            out.update(self.boundary(side))
        return out

    def interior_sites(self) -> list[Site]:
        """Sites strictly inside the box (the open rectangle)."""
        return [v for v in self.sites()
                if self.x_min < v.x < self.x_max and self.y_min < v.y < self.y_max]

    def side_mask(self, side: str) -> np.ndarray:
        mask = np.zeros(self.shape, dtype=bool)
        if side == "left":
            mask[:, 0] = True
        elif side == "right":
            mask[:, -1] = True
        elif side == "bottom":
            mask[0, :] = True
        elif side == "top":
            mask[-1, :] = True
        else:
            raise ValueError(f"unknown side {side!r}; expected one of {SIDES}")
        return mask

    def transpose(self) -> "Region":
        """Image of the region under ``(x, y) -> (y, x)``."""
        return Region(self.y_min, self.y_max, self.x_min, self.x_max)

    def mask(self, sites: Iterable) -> np.ndarray:
        """Boolean state-grid mask of a collection of sites."""
        m = np.zeros(self.shape, dtype=bool)
        for v in sites:
            m[self.local(v)] = True
        return m

    def sites_of(self, mask: np.ndarray) -> set[Site]:
        """Inverse of :meth:`mask`."""
        iy, ix = np.nonzero(mask)
        return {Site(int(x) + self.x_min, int(y) + self.y_min)
                for y, x in zip(iy, ix)}


@dataclass(frozen=True, eq=False)
class Configuration:
    """Open/closed state of every site of a region.

    ``states`` is a read-only ``uint8`` array of shape ``region.shape``.
    ``seed`` is ``None`` for hand-built configurations ("explicit").
    """

    region: Region
    states: np.ndarray
    p: float | None = None
    seed: int | None = None

    def __post_init__(self):
        states = np.ascontiguousarray(self.states, dtype=np.uint8)
        if states.shape != self.region.shape:
            raise ValueError(
                f"states shape {states.shape} does not match region shape "
                f"{self.region.shape}")
        if states.size and states.max() > 1:
            raise ValueError("states must be 0 (closed) or 1 (open)")
        if states is self.states and self.states.flags.writeable:
            states = states.copy()
        states.flags.writeable = False
        object.__setattr__(self, "states", states)

    @property
    def provenance(self) -> str:
        return "explicit" if self.seed is None else f"p={self.p!r},seed={self.seed}"

    @classmethod
    def from_open_sites(cls, region: Region, open_sites: Iterable) -> "Configuration":
        return cls(region, region.mask(open_sites).astype(np.uint8))

    @classmethod
    def filled(cls, region: Region, state: int) -> "Configuration":
        return cls(region, np.full(region.shape, state, dtype=np.uint8))

    @classmethod
    def from_bits(cls, region: Region, bits: int) -> "Configuration":
        """Configuration whose site with flat index ``i`` is open iff bit ``i`` is set."""
        flat = np.array([(bits >> i) & 1 for i in range(region.size)], dtype=np.uint8)
        return cls(region, flat.reshape(region.shape))

    def to_bits(self) -> int:
        flat = self.states.ravel()
        return int(sum(1 << i for i in np.flatnonzero(flat)))

    def state(self, v) -> int:
        return int(self.states[self.region.local(v)])

    def is_open(self, v) -> bool:
        return self.state(v) == OPEN

    def open_sites(self) -> set[Site]:
        return self.region.sites_of(self.states == OPEN)

    def number_open(self) -> int:
        return int(self.states.sum())

    def with_state(self, v, state: int) -> "Configuration":
        arr = self.states.copy()
        arr[self.region.local(v)] = state
        return Configuration(self.region, arr)

    def flip(self, v) -> "Configuration":
        """Copy with the state of `v` inverted."""
        return self.with_state(v, 1 - self.state(v))

    def invert(self) -> "Configuration":
        """Color swap: every open site becomes closed and vice versa."""
        p = None if self.p is None else 1.0 - self.p
        return Configuration(self.region, 1 - self.states, p=p, seed=self.seed)

    def transpose(self) -> "Configuration":
        """Image under the reflection ``(x, y) -> (y, x)``."""
        return Configuration(self.region.transpose(), self.states.T.copy())

    def restrict(self, region: Region) -> "Configuration":
        if not self.region.contains_region(region):
            raise ValueError(f"{region} is not inside {self.region}")
        r0, c0 = self.region.local((region.x_min, region.y_min))
        sub = self.states[r0:r0 + region.height, c0:c0 + region.width]
        return Configuration(region, sub.copy(), p=self.p, seed=self.seed)

    def __eq__(self, other):
        if not isinstance(other, Configuration):
            return NotImplemented
        return self.region == other.region and np.array_equal(self.states, other.states)

    def __hash__(self):
        return hash((self.region, self.states.tobytes()))

    def hamming(self, other: "Configuration") -> int:
        if self.region != other.region:
            raise ValueError("configurations live on different regions")
        return int(np.count_nonzero(self.states != other.states))

    def __str__(self):
        rows = ["".join("#" if s else "." for s in row) for row in self.states[::-1]]
        return "\n".join(rows)


def replica_seed(master_seed: int, replica: int) -> int:
    """64-bit seed of replica `replica` in the stream keyed by `master_seed`.

    Derived with :class:`numpy.random.SeedSequence` using ``replica`` as the
    spawn key, so the seed of a replica depends only on the pair and never on
    how replicas are scheduled.
    """
    if master_seed < 0 or replica < 0:
        raise ValueError("seeds and replica indices must be non-negative")
    ss = np.random.SeedSequence(master_seed, spawn_key=(replica,))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def uniforms(region: Region, seed: int) -> np.ndarray:
    """One uniform draw in ``[0, 1)`` per site, row-major, from a Philox stream."""
    if seed < 0:
        raise ValueError("seed must be non-negative")
    rng = np.random.Generator(np.random.Philox(seed))
    return rng.random(region.shape)


def threshold(u: np.ndarray, p: float) -> np.ndarray:
    """Sites with draw below `p` are open."""
    _check_p(p)
    return (u < p).astype(np.uint8)


def sample(region: Region, p: float, seed: int) -> Configuration:
    """I.i.d. Bernoulli(`p`) configuration, a deterministic function of its arguments.

    Each site gets one uniform from :func:`uniforms` and is open iff the draw
    is below `p`; configurations drawn with the same seed at different `p`
    are therefore coupled (monotone in `p`).
    """
    _check_p(p)
    return Configuration(region, threshold(uniforms(region, seed), p), p=float(p), seed=seed)


def _check_p(p: float) -> None:
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must lie in [0, 1], got {p}")
