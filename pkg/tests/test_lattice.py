import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from topofault.lattice import (
    PERIOD,
    Chain,
    EdgeKind,
    InvalidSpecError,
    LatticeSpec,
    Op,
    boundary,
    build_lattice,
    coboundary,
    dual,
    euler_characteristic,
    homology_class,
    map_operation,
    schedule_2d,
)


def counts_by_parity(sizes):
    """Oracle: count cells by enumerating the doubled grid directly."""
    out = [0, 0, 0, 0]
    for c in itertools.product(*(range(2 * s) for s in sizes)):
        out[sum(x & 1 for x in c)] += 1
    return out


@pytest.mark.parametrize("sizes", [(1, 1, 1), (4, 4, 4), (2, 3, 5)])
def test_cell_counts_match_enumeration(sizes):
    lat = build_lattice(LatticeSpec(*sizes))
    assert [lat.count(k) for k in range(4)] == counts_by_parity(sizes)


def test_small_counts():
    lat = build_lattice(LatticeSpec.cubic(1))
    assert [lat.count(k) for k in range(4)] == [1, 3, 3, 1]
    lat = build_lattice(LatticeSpec.cubic(4))
    assert [lat.count(k) for k in range(4)] == [64, 192, 192, 64]


@pytest.mark.parametrize("bad", [(0, 1, 1), (1, -2, 1), (1, 1, 1.5)])
def test_invalid_spec(bad):
    with pytest.raises(InvalidSpecError):
        LatticeSpec(*bad)


def test_face_boundary_is_four_edges():
    lat = build_lattice(LatticeSpec.cubic(3))
    for f in lat.cell_ids(2)[:20]:
        b = boundary(lat, Chain.from_ids(lat, 2, [f]))
        assert len(b) == 4
        fc = np.array(lat.coords_of(f))
        for e in b.coord_set():
            diff = (np.array(e) - fc) % 6
            assert sorted(min(d, 6 - d) for d in diff) == [0, 0, 1]


def test_edge_boundary_and_empty():
    lat = build_lattice(LatticeSpec.cubic(3))
    assert not boundary(lat, Chain.empty(lat, 1))
    b = boundary(lat, Chain.from_coords(lat, [(1, 2, 2)]))
    assert b.coord_set() == {(0, 2, 2), (2, 2, 2)}


def test_cube_surface_has_no_boundary():
    lat = build_lattice(LatticeSpec.cubic(3))
    cube = Chain.from_coords(lat, [(3, 3, 3)])
    surface = boundary(lat, cube)
    assert len(surface) == 6
    assert not boundary(lat, surface)


def test_dual_of_edge_is_face_and_cube_surface_maps_to_star():
    lat = build_lattice(LatticeSpec.cubic(3))
    e = Chain.from_coords(lat, [(1, 0, 0)])
    assert dual(lat, e).dim == 2 and len(dual(lat, e)) == 1
    surface = boundary(lat, Chain.from_coords(lat, [(3, 3, 3)]))
    star = dual(lat, surface)
    # the dual of cube (3,3,3) is vertex (4,4,4); its star is the six incident edges
    expected = coboundary(lat, Chain.from_coords(lat, [(4, 4, 4)]))
    assert star == expected


def test_homology_examples():
    lat = build_lattice(LatticeSpec.cubic(4))
    assert homology_class(lat, Chain.empty(lat, 1)) == (0, 0, 0)
    line_x = Chain.from_coords(lat, [(x, 0, 0) for x in range(1, 8, 2)])
    assert homology_class(lat, line_x) == (1, 0, 0)
    line_t = Chain.from_coords(lat, [(2, 4, z) for z in range(1, 8, 2)])
    assert homology_class(lat, line_t) == (0, 0, 1)
    with pytest.raises(ValueError):
        homology_class(lat, Chain.from_coords(lat, [(1, 0, 0)]))


@pytest.mark.parametrize("size", [1, 2, 3, 5])
def test_euler_characteristic_vanishes(size):
    assert euler_characteristic(build_lattice(LatticeSpec(size, size + 1, 2))) == 0


LAT = build_lattice(LatticeSpec(3, 2, 4))


def random_chain(seed: int, dim: int, lat=LAT) -> Chain:
    rng = np.random.default_rng(seed)
    ids = lat.cell_ids(dim)
    return Chain.from_ids(lat, dim, ids[rng.random(len(ids)) < rng.uniform(0.05, 0.6)])


@settings(max_examples=1000, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 3))
def test_boundary_squares_to_zero(seed, dim):
    c = random_chain(seed, dim)
    if dim >= 2:
        assert not boundary(LAT, boundary(LAT, c))
    assert not coboundary(LAT, coboundary(LAT, random_chain(seed, dim - 1))) if dim <= 2 else True


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 3))
def test_chain_addition_and_dual_involution(seed, dim):
    c = random_chain(seed, dim)
    assert not (c + c)
    d = dual(LAT, c)
    assert d.dim == 3 - dim and len(d) == len(c)
    assert dual(LAT, d) == c
    if dim >= 1:
        assert dual(LAT, boundary(LAT, c)) == coboundary(LAT, d)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 7), st.integers(0, 7))
def test_homology_is_invariant_and_additive(seed, wa, wb):
    lat = build_lattice(LatticeSpec.cubic(3))

    def winding(bits, offset):
        cells = []
        for axis in range(3):
            if bits >> axis & 1:
                base = [offset % 6 // 2 * 2] * 3
                for k in range(1, 6, 2):
                    c = list(base)
                    c[axis] = k
                    cells.append(tuple(c))
        return Chain.from_coords(lat, cells, dim=1)

    a, b = winding(wa, seed), winding(wb, seed >> 3)
    faces = random_chain(seed, 2, lat)
    shifted = a + boundary(lat, faces)
    assert homology_class(lat, shifted) == homology_class(lat, a)
    ha, hb = homology_class(lat, a), homology_class(lat, b)
    assert ha == tuple((wa >> k) & 1 for k in range(3))
    assert homology_class(lat, a + b) == tuple(x ^ y for x, y in zip(ha, hb))


def test_operation_mapping_rules():
    assert map_operation(EdgeKind.TIMELIKE, "Z") == "I"
    assert map_operation(EdgeKind.SPACELIKE, "X", trailing="X") == "H"
    assert map_operation("spacelike", "X", trailing="Z") == "P_X"
    with pytest.raises(ValueError):
        map_operation("timelike", "W")


def test_schedule_period_and_translation_invariance():
    spec = LatticeSpec(3, 2, 1)
    sched = schedule_2d(spec)
    assert {e.time_step for e in sched} == set(range(1, PERIOD + 1))
    cells = spec.size_x * spec.size_y
    # every elementary-cell operation appears once per cell
    by_step = {}
    for e in sched:
        by_step.setdefault((e.time_step, e.op), []).append(e.location)
    for locs in by_step.values():
        assert len(locs) % cells == 0
    # translating by one cell maps the schedule onto itself
    nx_, ny_ = 2 * spec.size_x, 2 * spec.size_y
    for dx, dy in [(2, 0), (0, 2)]:
        moved = {
            (e.time_step, e.op, tuple(((x + dx) % nx_, (y + dy) % ny_) for x, y in e.location)) for e in sched
        }
        assert moved == {(e.time_step, e.op, e.location) for e in sched}


def test_schedule_each_qubit_busy_once_per_step():
    sched = schedule_2d(LatticeSpec(2, 2, 1))
    for t in range(1, PERIOD + 1):
        busy = [site for e in sched if e.time_step == t for site in e.location]
        assert len(busy) == len(set(busy))
    gates = [e for e in sched if e.op is Op.ENTANGLING_PHASE]
    # each code qubit sees four entangling gates per period
    code_sites = {s for e in gates for s in e.location if (s[0] + s[1]) % 2}
    for s in code_sites:
        assert sum(s in e.location for e in gates) == 4
