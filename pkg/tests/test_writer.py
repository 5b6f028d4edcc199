import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from mcnpasm import parse_deck
from mcnpasm.algebra import Transform3D, axis_rotation
from mcnpasm.model import ProvenanceNode
from mcnpasm.writer import build_header, fmt15, fmt_num, parse_header, wrap_card

from conftest import DECKS, fixture_path, load

words = st.lists(st.from_regex(r"[0-9a-z:#()=.-]{1,20}", fullmatch=True), min_size=1, max_size=60)


def test_fmt15():
    assert fmt15(0.1) == "0.1"
    assert fmt15(-0.0) == "0"
    assert fmt15(np.cos(np.radians(1))) == "0.999847695156391"
    assert fmt15(1e-17) == "1e-17"


def test_fmt_num():
    assert fmt_num(60.0) == "60"
    assert fmt_num(-1) == "-1"
    assert fmt_num(0.5) == "0.5"


@given(words, st.one_of(st.none(), st.text("abc xyz", min_size=1, max_size=90)))
def test_wrap_card_width_and_content(tokens, comment):
    text = " ".join(tokens)
    lines = wrap_card(text, comment.strip() or None if comment else None)
    body = []
    for i, ln in enumerate(lines):
        assert len(ln) <= 80 or "$" in ln
        if i:
            assert ln.startswith("      ")
        body.append(ln.split("$")[0])
    assert "".join(" ".join(body).split()) == "".join(text.split())


@given(st.lists(st.from_regex(r"-?[1-9][0-9]{0,4}", fullmatch=True), min_size=40, max_size=60))
def test_wrapped_cards_parse_back(surfs):
    geom = ":".join(surfs)
    lines = wrap_card(f"1 0 {geom} imp:n=1")
    text = "t\n" + "\n".join(lines) + "\n2 0 -99999 imp:n=1\n3 0 99999 imp:n=0\n\n99999 so 1\n\nmode n\n"
    deck = parse_deck(text)
    assert deck.cells[0].params == {"imp:n": "1"}


def test_untouched_fixtures_are_written_verbatim():
    # only the provenance header is added, right after the title
    for name in DECKS:
        text = fixture_path(name).read_text()
        deck = load(name)
        title, rest = text.split("\n", 1)
        header = "\n".join(build_header(deck.provenance))
        # the metadata JSON is re-serialized, everything else is byte for byte
        assert deck.write().split("\n{")[0] == f"{title}\n{header}\n{rest}".split("\n{")[0]


def _tree():
    leaf = ProvenanceNode("./ccd.mcnp", applied_transforms=["Translation of vector: [60, 50, 0]"],
                          net_transform=Transform3D.translation_only([60, 50, 0]))
    det = ProvenanceNode("./detector.mcnp", applied_transforms=["Translation: [0, 400, 0] Rotation Y: 1"],
                         net_transform=axis_rotation("Y", 1, (0, 400, 0)), children=[leaf])
    bare = ProvenanceNode("./bare.mcnp", version_note="v2", notes=["hand made"])
    return ProvenanceNode("./room.mcnp", children=[det, bare])


def test_header_layout():
    lines = build_header(_tree())
    assert lines[:3] == ["c  - Original file: ", "c ./room.mcnp", "c      No transforms were applied"]
    assert "c  - Inserted files: " in lines
    assert "c ./detector.mcnp" in lines
    assert "c      Applied Euler XZX angles: a=-90.0, b=1.0, g=90.0 " in lines
    assert "c       - Files contained in ./detector.mcnp :" in lines
    assert "c       ./ccd.mcnp" in lines
    assert "c            Applied translation: [60.0, 50.0, 0.0]" in lines
    assert "c                 Translation of vector: [60, 50, 0]" in lines
    assert "c      Version: v2" in lines


def test_header_round_trip():
    root = _tree()
    lines = build_header(root)
    back, used = parse_header(lines + ["c not header"])
    assert used == len(lines)
    assert build_header(back) == lines
    det = back.children[0]
    assert det.net_transform == root.children[0].net_transform
    assert det.children[0].source_path == "./ccd.mcnp"


def test_no_header():
    assert parse_header(["c plain comment"]) == (None, 0)


def test_comment_after_header_is_not_swallowed():
    text = load("ccd").write().replace("\n1 82", "\nc lead shield below\n1 82", 1)
    deck = parse_deck(text)
    assert deck.cells[0].comments == ["c lead shield below"]
    assert deck.write() == text


def test_write_to_file_creates_dirs(tmp_path):
    d = load("ccd")
    target = tmp_path / "a" / "b" / "out.mcnp"
    text = d.write(str(target))
    assert target.read_text() == text


def test_metadata_and_trailing_written():
    d = load("detector")
    text = d.write()
    again = parse_deck(text)
    assert again.metadata == d.metadata
