import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from triperc.connectivity import lr_closed, lr_open
from triperc.errors import DomainError, PreconditionError
from triperc.geometry import (Arm, ArmSpec, Crossing, arm_event, bottom_mask, count_pivotal,
                              four_arm_spec, lowest_crossing, partition, pivotal_mask,
                              pivotal_sites_arms, pivotal_sites_flip, three_arm_spec)
from triperc.lattice import CLOSED, OPEN, Configuration, Region, Site, sample
from triperc.oracle import brute_force_lowest_crossing, minimal_bottom_table

SQ2 = Region.square(2)
FULL2 = Configuration.filled(SQ2, OPEN)
BOTTOM_ROW = Configuration.from_open_sites(SQ2, [(0, 0), (1, 0), (2, 0)])


def crossing_configs(n, seeds, p=0.5):
    r = Region.square(n)
    for seed in seeds:
        c = sample(r, p, seed)
        if lr_open(c):
            yield c


def test_lowest_crossing_examples():
    g = lowest_crossing(FULL2)
    assert g.path == ((0, 0), (1, 0), (2, 0))
    assert lowest_crossing(Configuration.filled(SQ2, CLOSED)) is None
    assert lowest_crossing(Configuration.filled(Region.square(0), OPEN)).path == ((0, 0),)


def test_lowest_crossing_is_valid_path():
    for c in crossing_configs(12, range(200)):
        g = lowest_crossing(c)
        g.validate(c)
        assert g.path[0].x == 0 and g.path[-1].x == 12


def test_lowest_crossing_matches_brute_force_on_3x3():
    table = minimal_bottom_table(SQ2)
    assert table.consistent()
    for bits in range(1 << SQ2.size):
        c = Configuration.from_bits(SQ2, bits)
        walk, brute = lowest_crossing(c), brute_force_lowest_crossing(c)
        assert (walk is None) == (brute is None)
        if walk is not None:
            assert np.array_equal(bottom_mask(SQ2, walk), bottom_mask(SQ2, brute))


def test_minimal_bottom_part_does_not_fix_the_path():
    # two crossings with the same B; the walk keeps the open site (1,0) that
    # touches the closed bottom region, the shorter path skips it
    c = Configuration.from_open_sites(SQ2, [(1, 0), (0, 1), (1, 1), (2, 1)])
    walk, brute = lowest_crossing(c), brute_force_lowest_crossing(c)
    assert walk.path == ((0, 1), (1, 0), (1, 1), (2, 1))
    assert brute.path == ((0, 1), (1, 1), (2, 1))
    assert np.array_equal(bottom_mask(SQ2, walk), bottom_mask(SQ2, brute))
    # (1,0) has the three arms, so it belongs on the lowest crossing
    part = partition(c, None, brute)
    assert arm_event(c, None, three_arm_spec((1, 0), part))


def test_partition_examples():
    part = partition(FULL2, None, lowest_crossing(FULL2))
    assert part.bottom_interior == frozenset()
    assert part.top_interior == frozenset(v for v in SQ2.sites() if v.y >= 1)
    top = Crossing(((0, 2), (1, 2), (2, 2)))
    part = partition(FULL2, None, top)
    assert part.top_interior == frozenset()
    assert part.bottom_interior == frozenset(v for v in SQ2.sites() if v.y <= 1)


def test_partition_rejects_non_crossings():
    with pytest.raises(DomainError):
        partition(BOTTOM_ROW, None, Crossing(((0, 0), (1, 0))))
    with pytest.raises(DomainError):
        partition(BOTTOM_ROW, None, Crossing(((0, 1), (1, 1), (2, 1))))
    with pytest.raises(DomainError):
        partition(FULL2, None, Crossing(((0, 0), (2, 0))))
    with pytest.raises(DomainError):
        partition(FULL2, None, Crossing(((0, 0), (1, 0), (0, 0), (1, 0), (2, 0))))


def test_partition_disjoint_and_covering_at_n16():
    r = Region.square(16)
    seen = 0
    for c in crossing_configs(16, range(2000)):
        g = lowest_crossing(c)
        part = partition(c, None, g)
        t, b, s = part.top_interior, part.bottom_interior, g.sites
        assert not (t & b) and not (t & s) and not (b & s)
        assert t | b | s == set(r.sites())
        assert set(r.boundary("top")) - s <= t
        assert set(r.boundary("bottom")) - s <= b
        seen += 1
    assert seen > 800


def test_partition_of_winding_crossing():
    # a crossing that dips and climbs leaves pockets on both sides
    r = Region(0, 4, 0, 4)
    path = ((0, 2), (1, 1), (2, 1), (2, 2), (2, 3), (3, 2), (4, 1))
    c = Configuration.from_open_sites(r, path)
    part = partition(c, None, Crossing(path))
    assert Site(1, 2) in part.top_interior
    assert Site(3, 1) in part.bottom_interior
    assert Site(0, 1) in part.bottom_interior and Site(0, 3) in part.top_interior


def test_arm_event_examples():
    one = Region.square(0)
    spec = ArmSpec((0, 0), (Arm(OPEN, "left"),))
    assert arm_event(Configuration.filled(one, OPEN), None, spec)
    assert not arm_event(Configuration.filled(one, CLOSED), None, spec)
    # center state requirement
    c = FULL2.with_state((1, 1), CLOSED)
    assert not arm_event(c, None, ArmSpec((1, 1), (Arm(OPEN, "left"),)))
    assert arm_event(c, None, ArmSpec((1, 1), (Arm(OPEN, "left"),), center_state=CLOSED))


def test_arm_event_disjointness_is_joint():
    # from (1,1), two open arms to Left need two different left-column sites
    r = Region.square(2)
    c = Configuration.from_open_sites(r, [(1, 1), (0, 1)])
    two_left = ArmSpec((1, 1), (Arm(OPEN, "left"), Arm(OPEN, "left")))
    assert not arm_event(c, None, two_left)
    c2 = Configuration.from_open_sites(r, [(1, 1), (0, 1), (0, 2)])
    assert arm_event(c2, None, two_left)
    # arms to left and right from the center of an open horizontal line
    line = Configuration.from_open_sites(r, [(0, 1), (1, 1), (2, 1)])
    assert arm_event(line, None, ArmSpec((1, 1), (Arm(OPEN, "left"), Arm(OPEN, "right"),
                                                   Arm(CLOSED, "top"), Arm(CLOSED, "bottom"))))


def test_arm_event_rejects_overlapping_containment():
    c = FULL2
    spec = ArmSpec((1, 1), (Arm(OPEN, "left", {(0, 1)}), Arm(OPEN, "right", {(0, 1), (2, 1)})))
    with pytest.raises(DomainError):
        arm_event(c, None, spec)
    with pytest.raises(DomainError):
        Arm(OPEN, "middle")
    with pytest.raises(DomainError):
        ArmSpec((0, 0), ())
    with pytest.raises(DomainError):
        arm_event(c, None, ArmSpec((5, 5), (Arm(OPEN, "left"),)))


def _three_arm_holds(c):
    g = lowest_crossing(c)
    part = partition(c, None, g)
    return all(arm_event(c, None, three_arm_spec(v, part)) for v in g.path)


def test_three_arm_property_exhaustive_3x3():
    for bits in range(1 << SQ2.size):
        c = Configuration.from_bits(SQ2, bits)
        if lr_open(c):
            assert _three_arm_holds(c), bits


def test_three_arm_property_random_n16():
    for c in crossing_configs(16, range(300)):
        assert _three_arm_holds(c)


def test_independence_of_region_above():
    r = Region.square(16)
    rng = np.random.default_rng(3)
    for c in crossing_configs(16, range(300)):
        g = lowest_crossing(c)
        part = partition(c, None, g)
        above = r.mask(part.top_interior)
        new = c.states.copy()
        new[above] = rng.random(int(above.sum())) < rng.random()
        assert lowest_crossing(Configuration(r, new)) == g


def test_pivotal_flip_examples():
    one = Region.square(0)
    for s in (OPEN, CLOSED):
        assert pivotal_sites_flip(Configuration.filled(one, s)) == {Site(0, 0)}
        assert count_pivotal(Configuration.filled(one, s)) == 1
    assert pivotal_sites_flip(FULL2) == set()
    assert count_pivotal(FULL2) == 0
    assert pivotal_sites_flip(BOTTOM_ROW) == {Site(0, 0), Site(1, 0), Site(2, 0)}
    assert count_pivotal(BOTTOM_ROW) == 3


def test_pivotal_arms_examples():
    assert pivotal_sites_arms(BOTTOM_ROW) == {Site(0, 0), Site(1, 0), Site(2, 0)}
    assert pivotal_sites_arms(FULL2) == set()
    with pytest.raises(PreconditionError):
        pivotal_sites_arms(Configuration.filled(SQ2, CLOSED))


def _flip_closed(c):
    """Flip-test pivotal set for the closed left-right crossing."""
    return {v for v in c.region.sites()
            if lr_closed(c.with_state(v, OPEN)) != lr_closed(c.with_state(v, CLOSED))}


@pytest.mark.parametrize("n", [1, 2, 3])
def test_pivotal_equivalences_exhaustive(n):
    r = Region.square(n)
    for bits in range(1 << r.size):
        c = Configuration.from_bits(r, bits)
        flip = pivotal_sites_flip(c)
        assert count_pivotal(c) == len(flip)
        assert r.sites_of(pivotal_mask(c)) == flip
        if lr_open(c):
            g = lowest_crossing(c)
            arms = pivotal_sites_arms(c)
            assert arms == flip
            assert flip <= g.sites
        # closed crossings: color swap of the open picture
        assert count_pivotal(c, color=CLOSED) == count_pivotal(c.invert())
        if n <= 2:
            assert _flip_closed(c) == pivotal_sites_flip(c.invert())


def test_pivotal_flip_full_sweep_without_crossing():
    r = Region.square(2)
    for bits in range(1 << r.size):
        c = Configuration.from_bits(r, bits)
        if lr_open(c):
            continue
        brute = {v for v in r.sites()
                 if lr_open(c.with_state(v, OPEN)) != lr_open(c.with_state(v, CLOSED))}
        assert pivotal_sites_flip(c) == brute


@pytest.mark.parametrize("n", [2, 3])
def test_containment_of_closed_arms_does_not_matter(n):
    r = Region.square(n)
    for bits in range(1 << r.size):
        c = Configuration.from_bits(r, bits)
        if lr_open(c):
            assert pivotal_sites_arms(c) == pivotal_sites_arms(c, contained=False)


def test_four_arm_spec_shapes():
    part = partition(FULL2, None, lowest_crossing(FULL2))
    s = four_arm_spec((1, 0), part)
    assert [a.target for a in s.arms] == ["left", "right", "bottom", "top"]
    assert s.arms[2].within == part.bottom_interior
    assert all(a.within is None for a in four_arm_spec((1, 0), None).arms)


@settings(max_examples=200)
@given(st.integers(0, 2 ** 32), st.integers(1, 10), st.integers(0, 120))
def test_pivotality_does_not_depend_on_own_state(seed, n, k):
    c = sample(Region.square(n), 0.5, seed)
    v = c.region.sites()[k % c.region.size]
    assert (v in pivotal_sites_flip(c)) == (v in pivotal_sites_flip(c.flip(v)))
    assert bool(pivotal_mask(c)[c.region.local(v)]) == bool(pivotal_mask(c.flip(v))[c.region.local(v)])


def test_pivotal_agreement_random_n16():
    for c in crossing_configs(16, range(300)):
        flip = pivotal_sites_flip(c)
        assert pivotal_sites_arms(c) == flip
        assert count_pivotal(c) == len(flip)
        assert flip <= lowest_crossing(c).sites


def test_sub_region_queries():
    big = sample(Region.square(10), 0.55, 4)
    sub = Region(2, 8, 1, 7)
    small = big.restrict(sub)
    assert lowest_crossing(big, sub) == lowest_crossing(small)
    assert count_pivotal(big, sub) == count_pivotal(small)
    assert pivotal_sites_flip(big, sub) == pivotal_sites_flip(small)
