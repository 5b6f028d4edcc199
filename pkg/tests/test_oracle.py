import numpy as np
import pytest

from mcnpasm.errors import OnSurface, UnsupportedMnemonic
from mcnpasm.oracle import (
    cell_membership,
    locate,
    point_in_cell,
    sample_clear_points,
    surface_function,
    surface_sense,
)

from conftest import deck_from, load


@pytest.mark.parametrize("mnemonic,coeffs,inside,outside", [
    ("so", [2], [0, 0, 1], [0, 0, 3]),
    ("s", [1, 1, 1, 1], [1, 1, 1.5], [0, 0, 0]),
    ("sx", [5, 1], [5.5, 0, 0], [0, 0, 0]),
    ("px", [1], [0, 0, 0], [2, 0, 0]),
    ("p", [0, 0, 2, 2], [0, 0, 0], [0, 0, 2]),
    ("cz", [1], [0.5, 0, 100], [2, 0, 0]),
    ("c/y", [1, 1, 1], [1, 50, 1.5], [0, 0, 0]),
    ("rpp", [-1, 1, -1, 1, -1, 1], [0, 0, 0], [0, 0, 2]),
    ("rcc", [0, 0, 0, 0, 0, 5, 1], [0, 0, 4], [0, 0, 6]),
    ("sph", [0, 0, 0, 1], [0, 0.5, 0], [0, 2, 0]),
])
def test_surface_signs(mnemonic, coeffs, inside, outside):
    q = np.array([inside, outside], dtype=float)
    v = surface_function(mnemonic, coeffs, q)
    assert v[0] < 0 < v[1]


def test_unsupported_mnemonic():
    with pytest.raises(UnsupportedMnemonic):
        surface_function("gq", [0] * 10, np.zeros((1, 3)))


def test_on_surface():
    d = load("ccd")
    with pytest.raises(OnSurface):
        surface_sense(d.surface(8), {}, [10, 0, 0])


def test_point_queries():
    d = load("ccd")
    assert point_in_cell(d, 3, [0, 0, 2])
    assert not point_in_cell(d, 3, [0, 0, 0])  # the chip is moved up by trcl
    assert locate(d, [0, 0, 2]) == [3]
    assert locate(d, [0, 0, 20]) == [5]


def test_locate_stops_at_lattice():
    d = load("lat_ex5")
    assert locate(d, [0.5, 0.5, 0]) == [1, 2]
    assert locate(d, [20, 0, 0]) == [7]


def test_surface_transform_applied():
    d = load("detector")
    # mirror plate 9 is rotated 45 degrees and lifted to y=50
    assert point_in_cell(d, 6, [0, 50, 0])
    assert point_in_cell(d, 6, [10, 60, 0])
    assert not point_in_cell(d, 6, [10, 50, 0])


def test_ambiguity_and_clear_sampling():
    d = deck_from("t\n1 0 -1 imp:n=1\n2 0 1 imp:n=0\n\n1 px 0\n\nmode n\n")
    inside, amb = cell_membership(d, 1, np.array([[0.0, 0, 0], [-1, 0, 0]]))
    assert amb.tolist() == [True, False] and inside[1]
    pts = sample_clear_points(d, [1, 2], np.random.default_rng(0), [-1] * 3, [1] * 3, 50)
    assert len(pts) == 50
