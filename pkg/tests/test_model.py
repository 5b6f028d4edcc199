import warnings

import pytest

from mcnpasm import bounding_expression, is_assemblable, validate_structure
from mcnpasm.errors import NotAssemblable
from mcnpasm.model import errors_of

from conftest import DECKS, deck_from, load

BASE = """\
model deck
1 1 -1.0 -1 imp:n=1
2 0 1 -2 imp:n=1
3 0 2 imp:n=0

1 so 5
2 so 10

m1 1001 2 8016 1
"""


def messages(deck, severity="error"):
    return [d.message for d in validate_structure(deck) if d.severity == severity]


@pytest.mark.parametrize("name", DECKS)
def test_fixtures_are_assemblable(name):
    assert errors_of(validate_structure(load(name))) == []


def test_dangling_references():
    d = deck_from(BASE.replace("-1 imp", "-1 -7 #9 imp").replace("1 1 -1.0", "1 5 -1.0"))
    msgs = messages(d)
    assert "dangling surface reference 7" in msgs
    assert "dangling cell reference #9" in msgs
    assert "dangling material reference 5" in msgs


def test_void_density_rule():
    d = deck_from(BASE)
    d.cells[1].density = -1.0
    assert "void cell must not carry a density" in messages(d)
    d = deck_from(BASE)
    d.cells[0].density = None
    assert "material cell needs a density" in messages(d)


def test_graveyard_rules():
    d = deck_from(BASE.replace("3 0 2 imp:n=0", "3 1 -1 2 imp:n=0"))
    assert not is_assemblable(d)
    with pytest.raises(NotAssemblable, match="second-to-last"):
        bounding_expression(d)
    short = deck_from(BASE)
    short.cells = short.cells[:1]
    assert not is_assemblable(short)


def test_bounding_expression():
    assert str(bounding_expression(deck_from(BASE)).surface) == "2"


def test_unknown_mnemonic_and_arity_warn():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        d = deck_from(BASE.replace("1 so 5", "1 xyz 5").replace("2 so 10", "2 so 10 3"))
    warns = messages(d, "warning")
    assert any("unknown surface mnemonic" in w for w in warns)
    assert any("so expects 1" in w for w in warns)
    assert is_assemblable(d)


def test_metadata_references_checked():
    d = deck_from(BASE + '\n{"g": {"cell": [1, 42], "surf": "x"}}\n')
    msgs = messages(d)
    assert "dangling metadata reference cell=42" in msgs
    assert "reserved key 'surf' must hold a list of integers" in msgs


def test_cell_param_data_card_warns():
    d = deck_from(BASE + "imp:n 1 1 0\n")
    assert any("cell parameter card" in w for w in messages(d, "warning"))


def test_deck_accessors_and_copy():
    d = load("detector")
    assert d.gas_cell.id == 10 and d.graveyard_cell.id == 11
    c = d.copy()
    c.cells[0].params["imp:p"] = "2"
    assert d.cells[0].params["imp:p"] == "1"
    with pytest.raises(KeyError):
        d.cell(999)
