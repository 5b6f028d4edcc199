import warnings

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from mcnpasm import parse_deck
from mcnpasm.algebra import Transform3D, apply_to_point, arbitrary_axis_rotation, axis_rotation
from mcnpasm.errors import CapacityExceeded
from mcnpasm.geometry import SurfaceSense, walk
from mcnpasm.oracle import membership_matrix, sample_points
from mcnpasm.transform import get_cumulative_transform, resolve_trcl, transform_deck

from conftest import deck_from, load

BOXES = {
    "detector": ([-120, -20, -60], [120, 120, 60]),
    "ccd": ([-12, -12, -12], [12, 12, 12]),
    "lat_ex5": ([-35, -35, -35], [35, 35, 35]),
    "trcl": ([-20, -20, -20], [20, 20, 30]),
}

SHARED = """\
tr card used by a surface and by a trcl cell
1 0 -1 trcl=5 imp:n=1
2 0 -2 imp:n=1
3 0 -3 #1 #2 imp:n=1
4 0 3 imp:n=0

1 so 1
2 5 sx 4 1
3 so 50

tr5 2 0 0
"""


@st.composite
def rigid(draw):
    u = draw(st.tuples(*[st.floats(-1, 1, allow_nan=False)] * 3).filter(lambda v: np.linalg.norm(v) > 0.1))
    shift = draw(st.tuples(*[st.floats(-100, 100, allow_nan=False)] * 3))
    return arbitrary_axis_rotation(u, draw(st.floats(-180, 180)), shift)


def same_geometry(before, after, t, box, seed=0, n=600):
    ids = [c.id for c in before.cells]
    pts = sample_points(np.random.default_rng(seed), *box, n)
    m0, a0 = membership_matrix(before, ids, pts)
    m1, a1 = membership_matrix(after, [c.id for c in after.cells], apply_to_point(t, pts))
    ok = ~(a0 | a1)
    return np.array_equal(m0[ok], m1[ok]) and ok.sum() > n * 0.9


@settings(max_examples=15, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(rigid(), st.sampled_from(sorted(BOXES)))
def test_transform_is_rigid(t, name):
    before = load(name)
    after = load(name)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        transform_deck(after, t)
    assert same_geometry(before, after, t, BOXES[name])
    # and the written text describes the same moved geometry
    again = parse_deck(after.write())
    assert same_geometry(before, again, t, BOXES[name], seed=1)


def test_shared_card_is_forked():
    d = deck_from(SHARED)
    t = axis_rotation("Z", 30, (5, 5, 0))
    moved = deck_from(SHARED)
    transform_deck(moved, t)
    ids = [tr.id for tr in moved.transforms]
    assert len(ids) == 3  # surface card, new card for bare surfaces, fork for the cell
    assert moved.surface(2).transform == 5
    assert moved.cell(1).trcl not in (5, None)
    assert same_geometry(d, moved, t, ([-10, -10, -10], [10, 10, 10]))


def test_identity_adds_no_card():
    d = load("ccd")
    transform_deck(d, Transform3D.identity())
    assert d.transforms == []


def test_bare_surfaces_share_one_new_card():
    d = load("room")
    d.translate([1, 2, 3])
    assert len(d.transforms) == 1
    assert {s.transform for s in d.surfaces} == {d.transforms[0].id}


def test_cumulative_and_provenance():
    d = load("ccd")
    d.translate([60, 50, 0])
    d.rotate("Z", 90, (0, 10, 0))
    cum = get_cumulative_transform(d)
    p = np.array([1.0, 0.0, 0.0])
    # translate first, then rotate and shift
    assert np.allclose(apply_to_point(cum, p), [-50, 71, 0])
    assert d.provenance.applied_transforms == [
        "Translation of vector: [60, 50, 0]", "Translation: [0, 10, 0] Rotation Z: 90"]
    assert d.provenance.net_transform == cum


def test_rotate_u_description():
    d = load("ccd")
    d.rotate_u([0, 0, 1], 45, (1, 0, 0))
    assert d.provenance.applied_transforms[-1] == "Translation: [1, 0, 0] Rotation U [0, 0, 1]: 45"
    assert d.get_tr().isclose(axis_rotation("Z", 45, (1, 0, 0)))


def test_lattice_fill_numbers_warn():
    d = load("lat_ex5")
    d.cell(2).params["fill"].array[0] = (2, 1)
    d.data_cards.insert(0, parse_deck(
        "t\n1 0 -1 imp:n=1\n2 0 1 imp:n=0\n\n1 so 1\n\ntr1 0 0 0\n").transforms[0])
    with pytest.warns(Warning, match="lattice"):
        transform_deck(d, axis_rotation("Z", 10))


def trcl_surfaces(deck):
    out = set()
    for c in deck.cells:
        if c.trcl is not None:
            out.update(n.surface for n in walk(c.geometry) if isinstance(n, SurfaceSense))
    return out


def test_resolve_trcl_renumbers():
    d = load("trcl")
    resolve_trcl(d)
    assert max(trcl_surfaces(d)) <= 999
    assert {s.id for s in d.surfaces} == {10, 1, 2}


def test_resolve_trcl_keep_duplicates():
    before = load("trcl")
    d = load("trcl")
    resolve_trcl(d, keep=[1500])
    assert 1500 in {s.id for s in d.surfaces}
    assert d.cell(3).geometry == SurfaceSense(1500, -1)
    assert max(trcl_surfaces(d)) <= 999
    assert same_geometry(before, d, Transform3D.identity(), BOXES["trcl"], n=3000)
    text = d.write()
    resolve_trcl(d, keep=[1500])
    assert d.write() == text


def test_resolve_trcl_through_complement():
    text = """\
trcl cell excludes a high-numbered cell
1 0 -5000 imp:n=1
2 0 -10 #1 trcl=(1 0 0) imp:n=1
3 0 -20 #2 imp:n=1
4 0 20 imp:n=0

5000 so 1
10 so 5
20 so 50

mode n
"""
    d = deck_from(text)
    resolve_trcl(d)
    assert 5000 not in {s.id for s in d.surfaces}


def test_resolve_trcl_capacity():
    d = load("trcl")
    from dataclasses import replace
    filler = [replace(d.surface(10), id=i, raw=None) for i in range(1, 1000) if i != 10]
    d.surfaces.extend(filler)
    with pytest.raises(CapacityExceeded):
        resolve_trcl(d)
