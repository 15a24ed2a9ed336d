import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from triperc import boundary, flip, region_neighbors
from triperc.errors import DomainError
from triperc.lattice import (CLOSED, OFFSETS, OPEN, Configuration, Region, Site, is_adjacent,
                             neighbors, replica_seed, sample, uniforms)

coords = st.integers(-10 ** 6, 10 ** 6)


def test_neighbors_of_origin_in_documented_order():
    assert neighbors((0, 0)) == [(1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1)]


def test_neighbors_translate():
    assert neighbors((5, -3)) == [(5 + dx, -3 + dy) for dx, dy in OFFSETS]


@given(coords, coords)
def test_degree_six_and_symmetry(x, y):
    nb = neighbors((x, y))
    assert len(set(nb)) == 6
    for w in nb:
        assert (x, y) in neighbors(w)
        assert is_adjacent(w, (x, y)) and is_adjacent((x, y), w)


def test_symmetry_on_many_random_sites():
    rng = np.random.default_rng(0)
    for x, y in rng.integers(-1000, 1000, size=(10_000, 2)):
        v = (int(x), int(y))
        nb = neighbors(v)
        assert len(set(nb)) == 6
        assert all(v in neighbors(w) for w in nb)


def test_reflection_preserves_adjacency_on_10x10():
    r = Region(0, 9, 0, 9)
    edges = {(u, w) for u in r.sites() for w in r.neighbors(u)}
    assert len(edges) == 2 * (9 * 10 * 2 + 9 * 9)
    reflected = {(Site(u.y, u.x), Site(w.y, w.x)) for u, w in edges}
    assert reflected == edges


def test_region_neighbors():
    r = Region.square(2)
    assert set(region_neighbors(r, (0, 0))) == {(1, 0), (0, 1)}
    assert set(region_neighbors(r, (1, 1))) == set(neighbors((1, 1)))
    assert region_neighbors(Region.square(0), (0, 0)) == []
    with pytest.raises(DomainError):
        region_neighbors(r, (3, 0))


def test_boundary_segments():
    r = Region.square(2)
    assert boundary(r, "left") == [(0, 0), (0, 1), (0, 2)]
    assert boundary(Region(-1, 1, 0, 2), "bottom") == [(-1, 0), (0, 0), (1, 0)]
    for side in ("left", "right", "top", "bottom"):
        assert boundary(Region.square(0), side) == [(0, 0)]
    with pytest.raises(ValueError):
        r.boundary("middle")


@given(st.integers(-5, 5), st.integers(0, 6), st.integers(-5, 5), st.integers(0, 6))
def test_boundary_union_is_topological_boundary(x0, w, y0, h):
    r = Region(x0, x0 + w, y0, y0 + h)
    topo = {v for v in r.sites()
            if v.x in (r.x_min, r.x_max) or v.y in (r.y_min, r.y_max)}
    assert r.boundary_sites() == topo
    assert r.size == (w + 1) * (h + 1) == len(r.sites())
    assert set(r.interior_sites()) == set(r.sites()) - topo


def test_corners_belong_to_both_segments():
    r = Region.square(3)
    assert (0, 0) in r.boundary("left") and (0, 0) in r.boundary("bottom")
    assert (3, 3) in r.boundary("right") and (3, 3) in r.boundary("top")


def test_sample_degenerate_p():
    r = Region.square(5)
    assert sample(r, 1.0, 3).number_open() == r.size
    assert sample(r, 0.0, 3).number_open() == 0


def test_sample_rejects_bad_p():
    with pytest.raises(DomainError):
        sample(Region.square(2), 1.5, 0)
    with pytest.raises(DomainError):
        sample(Region.square(2), -0.1, 0)


@settings(max_examples=50)
@given(st.integers(0, 2 ** 63), st.floats(0, 1))
def test_sample_deterministic(seed, p):
    r = Region(0, 7, 0, 4)
    a, b = sample(r, p, seed), sample(r, p, seed)
    assert a == b and a.states.tobytes() == b.states.tobytes()
    assert a.p == p and a.seed == seed


def test_sample_is_thresholded_uniforms_and_monotone_in_p():
    r = Region.square(6)
    u = uniforms(r, 11)
    assert np.array_equal(sample(r, 0.3, 11).states, (u < 0.3).astype(np.uint8))
    assert np.all(sample(r, 0.3, 11).states <= sample(r, 0.6, 11).states)


def test_sample_stream_is_stable():
    # frozen first draws: the site-state order must not change across versions
    u = uniforms(Region.rectangle(2, 0), 42)
    assert u.shape == (1, 3)
    expected = np.random.Generator(np.random.Philox(42)).random(3)
    assert np.array_equal(u.ravel(), expected)
    assert replica_seed(1729, 0) == replica_seed(1729, 0)
    assert replica_seed(1729, 0) != replica_seed(1729, 1)


def test_open_fraction_binomial():
    r = Region.square(63)
    R = 100_000
    total = 0
    for i in range(R):
        total += int(np.count_nonzero(uniforms(r, replica_seed(5, i)) < 0.5))
    frac = total / (R * r.size)
    assert abs(frac - 0.5) <= 4 * np.sqrt(0.25 / (R * r.size))


def test_flip():
    r = Region.square(3)
    c = sample(r, 0.5, 9)
    v = (1, 2)
    f = flip(c, v)
    assert f.state(v) == 1 - c.state(v)
    assert flip(f, v) == c
    assert c.hamming(f) == 1
    assert flip(Configuration.filled(r, OPEN), v).number_open() == r.size - 1
    with pytest.raises(DomainError):
        flip(c, (4, 4))


def test_configuration_is_immutable_and_validated():
    r = Region.square(1)
    arr = np.array([[1, 0], [0, 1]], dtype=np.uint8)
    c = Configuration(r, arr)
    arr[0, 0] = 0
    assert c.state((0, 0)) == OPEN
    with pytest.raises(ValueError):
        c.states[0, 0] = 0
    with pytest.raises(ValueError):
        Configuration(r, np.zeros((3, 3)))
    with pytest.raises(ValueError):
        Configuration(r, np.full((2, 2), 2))
    assert c.provenance == "explicit"


def test_bits_roundtrip():
    r = Region(0, 2, 0, 1)
    for bits in range(64):
        c = Configuration.from_bits(r, bits)
        assert c.to_bits() == bits
    c = Configuration.from_bits(r, 0b000010)
    assert c.open_sites() == {Site(1, 0)}


def test_invert_and_transpose():
    c = sample(Region(0, 4, 0, 2), 0.3, 1)
    inv = c.invert()
    assert np.array_equal(inv.states, 1 - c.states)
    assert inv.p == pytest.approx(0.7)
    t = c.transpose()
    assert t.region == Region(0, 2, 0, 4)
    assert all(t.state((v.y, v.x)) == c.state(v) for v in c.region.sites())
    assert CLOSED == 0 and OPEN == 1
