import itertools
import math
from collections import deque

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from triperc.connectivity import (LR, TB, CrossingQuery, closed_circuit_in_annulus,
                                  cluster_radius, cluster_size_at, has_crossing, label_clusters,
                                  lr_closed, lr_open, lr_open_endpoint_exempt, radius_reached,
                                  tb_closed, tb_open)
from triperc.errors import DomainError
from triperc.lattice import CLOSED, OPEN, Configuration, Region, Site, neighbors, sample

CHECKER = Configuration.from_open_sites(Region.square(2), [(0, 0), (2, 0), (1, 1), (0, 2), (2, 2)])


def configs(max_side=6):
    @st.composite
    def build(draw):
        w = draw(st.integers(0, max_side))
        h = draw(st.integers(0, max_side))
        r = Region(0, w, 0, h)
        bits = draw(st.integers(0, 2 ** r.size - 1))
        return Configuration.from_bits(r, bits)
    return build()


def bfs_components(c: Configuration, color: int) -> list[set]:
    """Independent cluster oracle: plain breadth-first search."""
    r = c.region
    seen, comps = set(), []
    for v in r.sites():
        if v in seen or c.state(v) != color:
            continue
        comp, queue = {v}, deque([v])
        seen.add(v)
        while queue:
            u = queue.popleft()
            for w in neighbors(u):
                if w in r and w not in seen and c.state(w) == color:
                    seen.add(w)
                    comp.add(w)
                    queue.append(w)
        comps.append(comp)
    return comps


def test_label_clusters_examples():
    full = label_clusters(Configuration.filled(Region.square(2), OPEN), OPEN)
    assert full.n_clusters == 1 and full.sizes.tolist() == [9]
    # (x + y) even open: (0,0) and (2,2) differ from (1,1) by (1,1), which is not a
    # lattice offset, so only the anti-diagonal (2,0)-(1,1)-(0,2) is connected
    lab = label_clusters(CHECKER, OPEN)
    assert lab.n_clusters == 3 and sorted(lab.sizes.tolist()) == [1, 1, 3]
    assert lab.same_cluster((2, 0), (0, 2))
    assert not lab.same_cluster((0, 0), (1, 1))
    assert not lab.same_cluster((0, 0), (2, 2))
    empty = Configuration.filled(Region.square(3), CLOSED)
    assert label_clusters(empty, OPEN).n_clusters == 0
    assert label_clusters(empty, CLOSED).n_clusters == 1


def test_label_clusters_matches_bfs_exhaustively_on_4x4():
    r = Region.square(3)
    for bits in range(1 << r.size):
        c = Configuration.from_bits(r, bits)
        for color in (OPEN, CLOSED):
            lab = label_clusters(c, color)
            got = sorted(sorted(lab.cluster(k)) for k in range(lab.n_clusters))
            want = sorted(sorted(comp) for comp in bfs_components(c, color))
            assert got == want, (bits, color)


@settings(max_examples=200)
@given(configs(), st.sampled_from([OPEN, CLOSED]))
def test_cluster_sizes_sum_to_color_count(c, color):
    lab = label_clusters(c, color)
    assert int(lab.sizes.sum()) == int(np.count_nonzero(c.states == color))
    assert all(lab.size_of(v) == len(lab.cluster(lab.label_of(v)))
               for v in c.region.sites() if c.state(v) == color)


def test_crossing_examples():
    one = Region.square(0)
    for s in (OPEN, CLOSED):
        c = Configuration.filled(one, s)
        assert lr_open(c) == bool(s)
    c = Configuration.from_open_sites(Region.square(1), [(0, 0), (1, 1)])
    assert not lr_open(c)
    assert tb_closed(c)
    for n in range(5):
        full = Configuration.filled(Region.square(n), OPEN)
        assert lr_open(full) and tb_open(full)
        assert not lr_closed(full) and not tb_closed(full)


def test_crossing_query():
    c = CHECKER
    assert has_crossing(c, CrossingQuery(c.region, LR, OPEN))
    assert has_crossing(c, CrossingQuery(c.region, TB, OPEN))
    assert not has_crossing(c, CrossingQuery(c.region, LR, CLOSED))
    sub = Region(0, 1, 0, 0)
    assert not has_crossing(c, CrossingQuery(sub, LR, OPEN))
    with pytest.raises(DomainError):
        CrossingQuery(c.region, "diagonal")
    with pytest.raises(DomainError):
        CrossingQuery(c.region, LR, 3)


@pytest.mark.parametrize("n", [0, 1, 2, 3])
def test_duality_exhaustive(n):
    r = Region.square(n)
    for bits in range(1 << r.size):
        c = Configuration.from_bits(r, bits)
        assert lr_open(c) != tb_closed(c)


def test_duality_on_rectangles_and_random_configs():
    for w, h in [(0, 4), (4, 0), (1, 3), (3, 1), (2, 4)]:
        r = Region(0, w, 0, h)
        for bits in range(1 << r.size):
            c = Configuration.from_bits(r, bits)
            assert lr_open(c) != tb_closed(c)
    for i in range(2000):
        c = sample(Region.square(32), 0.5, i)
        assert lr_open(c) != tb_closed(c)


def test_monotonicity_under_coupling():
    r = Region(0, 20, 0, 14)
    for seed in range(300):
        lo, hi = sample(r, 0.45, seed), sample(r, 0.55, seed)
        assert np.all(lo.states <= hi.states)
        assert lr_open(hi) or not lr_open(lo)
        assert lr_closed(lo) or not lr_closed(hi)


@settings(max_examples=300)
@given(configs())
def test_color_and_reflection_symmetry(c):
    inv = c.invert()
    assert lr_open(c) == lr_closed(inv)
    assert tb_open(c) == tb_closed(inv)
    t = c.transpose()
    assert lr_open(c) == tb_open(t)
    assert lr_closed(c) == tb_closed(t)


def test_reflection_exhaustive_on_3x3():
    r = Region.square(2)
    for bits in range(1 << r.size):
        c = Configuration.from_bits(r, bits)
        assert lr_open(c) == tb_open(c.transpose())
        assert lr_open(c) == lr_closed(c.invert())


def test_endpoint_exempt_crossing():
    c = Configuration.from_open_sites(Region.square(2), [(1, 0), (1, 1), (1, 2)])
    assert not lr_open(c)
    assert lr_open_endpoint_exempt(c)
    assert lr_open_endpoint_exempt(Configuration.filled(Region.square(2), CLOSED)) is False
    assert lr_open_endpoint_exempt(Configuration.filled(Region.square(1), CLOSED))


def test_radius_reached():
    r = Region.centered(3)
    closed = Configuration.filled(r, CLOSED)
    assert not radius_reached(closed, (0, 0))
    full = Configuration.filled(r, OPEN)
    assert all(radius_reached(full, v) for v in r.sites())
    lone = Configuration.from_open_sites(r, [(3, 1)])
    assert radius_reached(lone, (3, 1))
    inner = Configuration.from_open_sites(r, [(0, 0), (1, 0)])
    assert not radius_reached(inner, (0, 0))
    assert radius_reached(inner, (0, 0), Region.centered(1))
    with pytest.raises(DomainError):
        radius_reached(full, (4, 0))


def test_cluster_size_and_radius():
    full = Configuration.filled(Region.centered(1), OPEN)
    assert cluster_size_at(full, (0, 0)) == 9
    lone = Configuration.from_open_sites(Region.centered(2), [(0, 0)])
    assert cluster_size_at(lone, (0, 0)) == 1
    assert cluster_size_at(lone, (1, 1)) == 0
    assert cluster_radius(lone, (0, 0)) == 0
    assert cluster_radius(lone, (1, 1)) == -1
    assert cluster_size_at(CHECKER, (0, 0)) == 1
    assert cluster_size_at(CHECKER, (1, 1)) == 3


def _embed(v):
    return (v[0] + v[1] / 2, v[1] * math.sqrt(3) / 2)


def _surrounding_closed_cycle(c: Configuration, inner: Region, outer: Region) -> bool:
    """Explicit search for a simple closed cycle in the annulus winding around `inner`."""
    ring = [v for v in outer.sites() if v not in inner and c.state(v) == CLOSED]
    ringset = set(ring)
    cx = (inner.x_min + inner.x_max) / 2
    cy = (inner.y_min + inner.y_max) / 2
    center = _embed((cx, cy))

    def angle(a, b):
        ax, ay = _embed(a)
        bx, by = _embed(b)
        t1 = math.atan2(ay - center[1], ax - center[0])
        t2 = math.atan2(by - center[1], bx - center[0])
        d = t2 - t1
        while d > math.pi:
            d -= 2 * math.pi
        while d < -math.pi:
            d += 2 * math.pi
        return d

    order = {v: i for i, v in enumerate(ring)}
    for start in ring:
        # cycles whose smallest vertex is `start`
        stack = [(start, [start], 0.0)]
        while stack:
            v, path, wind = stack.pop()
            for w in neighbors(v):
                if w not in ringset or order[w] < order[start]:
                    continue
                if w == start and len(path) >= 3:
                    if abs(wind + angle(v, w)) > math.pi:
                        return True
                elif w not in path:
                    stack.append((w, path + [w], wind + angle(v, w)))
    return False


@pytest.mark.parametrize("outer,inner", [
    (Region.square(2), Region(1, 1, 1, 1)),
    (Region.square(3), Region(1, 2, 1, 2)),
    (Region(0, 4, 0, 2), Region(1, 3, 1, 1)),
])
def test_annulus_separation_matches_explicit_cycles(outer, inner):
    annulus = [v for v in outer.sites() if v not in inner]
    for bits in range(1 << len(annulus)):
        closed = [v for i, v in enumerate(annulus) if (bits >> i) & 1]
        opened = set(outer.sites()) - set(closed)
        c = Configuration.from_open_sites(outer, opened)
        assert closed_circuit_in_annulus(c, inner, outer) == \
            _surrounding_closed_cycle(c, inner, outer), closed


def test_annulus_examples_and_errors():
    outer, inner = Region.centered(3), Region.centered(1)
    assert closed_circuit_in_annulus(Configuration.filled(outer, CLOSED), inner, outer)
    assert not closed_circuit_in_annulus(Configuration.filled(outer, OPEN), inner, outer)
    with pytest.raises(DomainError):
        closed_circuit_in_annulus(Configuration.filled(outer, OPEN), Region(-3, 0, 0, 0), outer)
    with pytest.raises(DomainError):
        closed_circuit_in_annulus(Configuration.filled(inner, OPEN), Region(0, 0, 0, 0), outer)
