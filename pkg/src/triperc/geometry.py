"""
Lowest crossing, the two sides of a crossing, arm events and pivotal sites.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .connectivity import lr_open
from .errors import DomainError, PreconditionError
from .lattice import CLOSED, OPEN, SIDES, Configuration, Region, Site, is_adjacent


@dataclass(frozen=True)
class Crossing:
    """A left-right path of sites of one color, ordered from left to right."""

    path: tuple[Site, ...]
    color: int = OPEN

    def __post_init__(self):
        object.__setattr__(self, "path", tuple(Site(*v) for v in self.path))

    @property
    def sites(self) -> frozenset[Site]:
        return frozenset(self.path)

    def __len__(self) -> int:
        return len(self.path)

    def validate(self, c: Configuration, r: Region | None = None) -> None:
        """Raise :class:`DomainError` unless this is a left-right crossing of `r` in `c`."""
        r = c.region if r is None else r
        path = self.path
        if not path:
            raise DomainError("empty path")
        if len(set(path)) != len(path):
            raise DomainError("path repeats a site")
        for v in path:
            if v not in r:
                raise DomainError(f"path site {v} is outside {r}")
            if c.state(v) != self.color:
                raise DomainError(f"path site {v} does not have the crossing color")
        for u, v in zip(path, path[1:]):
            if not is_adjacent(u, v):
                raise DomainError(f"consecutive sites {u} and {v} are not adjacent")
        if path[0].x != r.x_min or path[-1].x != r.x_max:
            raise DomainError("path does not run from the left to the right side")


@dataclass(frozen=True)
class CrossingPartition:
    """Sites strictly above and strictly below a crossing."""

    crossing: Crossing
    top_interior: frozenset[Site]
    bottom_interior: frozenset[Site]

    @property
    def top(self) -> frozenset[Site]:
        """T(crossing): the crossing together with the sites above it."""
        return self.top_interior | self.crossing.sites

    @property
    def bottom(self) -> frozenset[Site]:
        """B(crossing): the crossing together with the sites below it."""
        return self.bottom_interior | self.crossing.sites


@dataclass(frozen=True)
class Arm:
    """One arm requirement: a path of `color` from a neighbor of the center to `target`.

    `within`, when given, restricts the sites the arm may use. An arm whose
    target segment contains the center is satisfied by the empty path.
    """

    color: int
    target: str
    within: frozenset[Site] | None = None

    def __post_init__(self):
        if self.target not in SIDES:
            raise DomainError(f"unknown target side {self.target!r}")
        if self.within is not None:
            object.__setattr__(self, "within", frozenset(Site(*v) for v in self.within))


@dataclass(frozen=True)
class ArmSpec:
    center: Site
    arms: tuple[Arm, ...] = field(default_factory=tuple)
    center_state: int = OPEN

    def __post_init__(self):
        object.__setattr__(self, "center", Site(*self.center))
        object.__setattr__(self, "arms", tuple(self.arms))
        if not self.arms:
            raise DomainError("an arm spec needs at least one arm")


def lowest_crossing(c: Configuration, r: Region | None = None) -> Crossing | None:
    """The left-right open crossing of `r` with the smallest bottom part, or None.

    The bottom part B is unique, but several crossings can share it (a path
    may skip an open site of B that touches the closed region below). The
    returned path is the loop-erased trace of the exploration walk between
    the open sites and the closed sites joined to the bottom; it contains
    every open site of B with open arms to both sides and a closed arm to the
    bottom, and is ordered from left to right.
    """
    r = c.region if r is None else r
    states = c.states if r == c.region else c.restrict(r).states
    out = _kernels.lowest_crossing_walk(states)
    if len(out) == 0:
        return None
    return Crossing(tuple(Site(int(ix) + r.x_min, int(iy) + r.y_min) for ix, iy in out))


def _side_grid(r: Region, path: Sequence[Site]) -> np.ndarray:
    H, W = r.shape
    px = np.array([v.x - r.x_min for v in path], dtype=np.int64)
    py = np.array([v.y - r.y_min for v in path], dtype=np.int64)
    if H >= 2 and W >= 2:
        return _kernels.side_labels(H, W, px, py)
    grid = np.full((H, W), -1, dtype=np.int8)
    grid[py, px] = 2
    if W == 1 and H >= 2:
        # a single column: the path is a vertical segment
        grid[:py.min(), 0] = 0
        grid[py.max() + 1:, 0] = 1
    return grid


def partition(c: Configuration, r: Region | None, crossing: Crossing) -> CrossingPartition:
    """Split the sites of `r` off the crossing into the parts above and below it."""
    r = c.region if r is None else r
    crossing.validate(c, r)
    grid = _side_grid(r, crossing.path)
    if np.any(grid < 0):
        raise DomainError("crossing does not separate the region into two sides")
    return CrossingPartition(
        crossing,
        top_interior=frozenset(r.sites_of(grid == 1)),
        bottom_interior=frozenset(r.sites_of(grid == 0)),
    )


def bottom_mask(r: Region, crossing: Crossing) -> np.ndarray:
    """Boolean grid of B(crossing); no validation, for enumeration code."""
    grid = _side_grid(r, crossing.path)
    return (grid == 0) | (grid == 2)


def arm_event(c: Configuration, r: Region | None, spec: ArmSpec) -> bool:
    """Whether the arms of `spec` can be realized by site-disjoint paths.

    Arms of different colors are disjoint automatically. Arms of one color
    are solved jointly as a vertex-disjoint flow from the center to one sink
    per arm; arms of one color with different containments are supported
    when their containments do not overlap.
    """
    r = c.region if r is None else r
    r.check(spec.center)
    states = c.states if r == c.region else c.restrict(r).states
    iy, ix = r.local(spec.center)
    if states[iy, ix] != spec.center_state:
        return False
    groups: dict[tuple[int, frozenset | None], list[Arm]] = {}
    for arm in spec.arms:
        if spec.center in r.boundary(arm.target):
            continue
        groups.setdefault((arm.color, arm.within), []).append(arm)
    by_color: dict[int, list[frozenset | None]] = {}
    for color, within in groups:
        by_color.setdefault(color, []).append(within)
    for color, wins in by_color.items():
        if len(wins) > 1:
            if any(w is None for w in wins):
                raise DomainError("arms of one color mix restricted and unrestricted paths")
            for i, a in enumerate(wins):
                for b in wins[i + 1:]:
                    if a & b:
                        raise DomainError(
                            "arms of one color with overlapping containments are not supported")
    for (color, within), arms in groups.items():
        allowed = states == color
        if within is not None:
            allowed &= r.mask(v for v in within if v in r)
        allowed[iy, ix] = False
        targets = np.stack([r.side_mask(a.target) for a in arms])
        flow = _kernels.disjoint_arm_flow(allowed, targets, iy, ix)
        if flow < len(arms):
            return False
    return True


def three_arm_spec(v, part: CrossingPartition) -> ArmSpec:
    """Open arms to left and right, closed arm to the bottom inside B°."""
    return ArmSpec(v, (
        Arm(OPEN, "left"),
        Arm(OPEN, "right"),
        Arm(CLOSED, "bottom", part.bottom_interior),
    ))


def four_arm_spec(v, part: CrossingPartition | None) -> ArmSpec:
    """The three-arm spec plus a closed arm to the top inside T°.

    With ``part=None`` both closed arms are unrestricted (and must then be
    disjoint from each other).
    """
    if part is None:
        return ArmSpec(v, (
            Arm(OPEN, "left"), Arm(OPEN, "right"),
            Arm(CLOSED, "bottom"), Arm(CLOSED, "top"),
        ))
    return ArmSpec(v, (
        Arm(OPEN, "left"), Arm(OPEN, "right"),
        Arm(CLOSED, "bottom", part.bottom_interior),
        Arm(CLOSED, "top", part.top_interior),
    ))


def pivotal_sites_flip(c: Configuration, r: Region | None = None) -> set[Site]:
    """Sites whose state decides the left-right open crossing.

    A site is pivotal when the crossing indicator differs between the
    configuration with that site opened and with it closed. With a crossing
    present only the sites of the lowest crossing can be pivotal, so only
    they are tested.
    """
    r = c.region if r is None else r
    if r != c.region:
        c = c.restrict(r)
    gamma = lowest_crossing(c)
    candidates: Iterable[Site] = gamma.path if gamma is not None else r.sites()
    out = set()
    for v in candidates:
        if lr_open(c.with_state(v, OPEN)) != lr_open(c.with_state(v, CLOSED)):
            out.add(Site(*v))
    return out


def _closed_arm_mask(states: np.ndarray, region_mask: np.ndarray, side: str) -> np.ndarray:
    """Sites that touch a closed cluster of ``region_mask`` reaching `side`.

    Sites on `side` themselves are included (empty arm).
    """
    H, W = states.shape
    sub = np.where(region_mask & (states == CLOSED), 0, 2).astype(np.uint8)
    labels, _ = _kernels.label(sub, 0)
    edge = {"bottom": labels[0, :], "top": labels[-1, :]}[side]
    good = np.zeros(labels.max() + 2, dtype=bool)
    good[edge[edge >= 0]] = True
    ok = np.zeros((H, W), dtype=bool)
    padded = np.full((H + 2, W + 2), -1, dtype=np.int64)
    padded[1:-1, 1:-1] = labels
    for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1)):
        nb = padded[1 + dy:H + 1 + dy, 1 + dx:W + 1 + dx]
        ok |= (nb >= 0) & good[nb]
    if side == "bottom":
        ok[0, :] = True
    else:
        ok[-1, :] = True
    return ok


def pivotal_sites_arms(c: Configuration, r: Region | None = None, *,
                       contained: bool = True) -> set[Site]:
    """Sites of the lowest crossing carrying four arms.

    The open arms are the two halves of the lowest crossing itself; the
    closed arms go to the bottom inside B° and to the top inside T°. With
    ``contained=False`` the two closed arms may use any closed sites and are
    checked with :func:`arm_event`.
    """
    r = c.region if r is None else r
    if r != c.region:
        c = c.restrict(r)
    gamma = lowest_crossing(c)
    if gamma is None:
        raise PreconditionError("configuration has no left-right open crossing")
    if not contained:
        return {v for v in gamma.path if arm_event(c, None, four_arm_spec(v, None))}
    part = partition(c, None, gamma)
    below = r.mask(part.bottom_interior)
    above = r.mask(part.top_interior)
    down = _closed_arm_mask(c.states, below, "bottom")
    up = _closed_arm_mask(c.states, above, "top")
    return {v for v in gamma.path if down[r.local(v)] and up[r.local(v)]}


def pivotal_mask(c: Configuration, color: int = OPEN) -> np.ndarray:
    """Boolean grid of sites pivotal for the left-right crossing of `color`."""
    states = c.states if color == OPEN else 1 - c.states
    return _kernels.pivotal_mask(states).astype(bool)


def count_pivotal(c: Configuration, r: Region | None = None, color: int = OPEN) -> int:
    """Number of pivotal sites for the left-right crossing of `color`.

    Computed with a linear sweep through :func:`pivotal_mask`; the count
    equals ``len(pivotal_sites_flip(c, r))`` for open crossings.
    """
    if r is not None and r != c.region:
        c = c.restrict(r)
    return int(pivotal_mask(c, color).sum())
