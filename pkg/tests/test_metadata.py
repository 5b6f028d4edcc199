import numpy as np
import pytest

from mcnpasm import add_card, find_tr_card, get_group, merge_metadata, parse_deck
from mcnpasm.algebra import apply_to_point
from mcnpasm.errors import DeckWarning, UnknownGroup, UnknownKey, UnknownTransform
from mcnpasm.model import MetadataBlock

from conftest import load


def test_get_group():
    d = load("detector")
    assert get_group(d, "ScintillatorCell", "position") == [0.0, 1.0, 0.0]
    with pytest.raises(UnknownGroup):
        get_group(d, "Nope", "cell")
    with pytest.raises(UnknownKey):
        get_group(d, "ScintillatorCell", "nope")


def test_find_tr_card_moves_positions():
    d = load("detector")
    d.rotate("Y", 1, (0, 400, 0))
    tr = get_group(d, "ScintillatorCell", "trans")[0]
    card = find_tr_card(d, tr)
    m = np.array(card["rot"]).reshape(3, 3)
    p_old = np.array(get_group(d, "ScintillatorCell", "position"))
    p_new = m.T @ p_old + np.array(card["translat"])
    assert np.allclose(p_new, apply_to_point(d.transform(tr).transform, p_old))
    with pytest.raises(UnknownTransform):
        find_tr_card(d, 999)


def test_add_card_round_trip():
    d = load("ccd")
    add_card(d, ["f4:p 3", "c flux in the chip", "sdef pos=0 0 -20 erg=0.1"])
    add_card(d, "cut:p j 0.01")
    text = d.write()
    assert "f4:p 3\nc flux in the chip\nsdef pos=0 0 -20 erg=0.1\n" in text
    again = parse_deck(text)
    names = [c.name for c in again.other_data_cards]
    assert names[-3:] == ["f4:p", "sdef", "cut:p"]


def test_add_card_unknown_first_line_becomes_comment():
    d = load("ccd")
    add_card(d, ["free text note"])
    assert "c free text note" in d.write()


def test_add_card_rejects_blank():
    d = load("ccd")
    with pytest.raises(ValueError):
        add_card(d, [])
    with pytest.raises(ValueError):
        add_card(d, ["nps 10", ""])


def test_merge_renames_collisions():
    host = MetadataBlock({"a": {"cell": [1]}})
    guest = MetadataBlock({"a": {"cell": [7]}, "b": {}})
    with pytest.warns(DeckWarning):
        out = merge_metadata(host, guest, "dir/guest.mcnp")
    assert out.groups == {"a": {"cell": [1]}, "a@guest.mcnp": {"cell": [7]}, "b": {}}
    assert host.groups == {"a": {"cell": [1]}}
