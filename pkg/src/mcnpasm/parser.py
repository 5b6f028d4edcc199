"""Read MCNP input text into a :class:`~mcnpasm.model.Deck`."""
from __future__ import annotations

import json
import re
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import algebra
from .algebra import Transform3D
from .errors import (
    CardSyntaxError,
    DeckWarning,
    DuplicateId,
    MissingBlock,
    MultipleMetadataBlocks,
    ParseError,
    UnsupportedForm,
)
from .geometry import parse_geometry
from .model import (
    AuxCard,
    CellCard,
    Deck,
    Fill,
    MaterialCard,
    MaterialEntry,
    MetadataBlock,
    OpaqueCard,
    ProvenanceNode,
    SurfaceCard,
    TransformCard,
)

_COMMENT = re.compile(r"^ {0,4}[cC](?: |$)")
_CARD_NAME = re.compile(r"^(\*?)([a-z]+)(\d*)((?::[a-z,/]+)?)$")
_INT = re.compile(r"^[+-]?\d+$")
_KEY = re.compile(r"\*?[a-z][a-z0-9]*(?::[a-z0-9,/]+)?")
_NOT_KEYWORDS = {"j", "r", "i", "m"}
AUX_KINDS = ("mt", "mx", "mpn")


@dataclass
class RawCard:
    joined_text: str
    source_lines: tuple
    inline_comments: list = field(default_factory=list)
    block: str = "data"
    raw_lines: list = field(default_factory=list)
    comments: list = field(default_factory=list)

    @property
    def comment(self) -> Optional[str]:
        if not self.inline_comments:
            return None
        return " ".join(t for _, t in self.inline_comments if t) or None


@dataclass
class Blocks:
    title: str
    message: Optional[str]
    cell_lines: list
    surface_lines: list
    data_lines: list
    trailing_text: str


def is_comment_line(line: str) -> bool:
    return bool(_COMMENT.match(line))


def split_blocks(text: str) -> Blocks:
    """Cut the input into title, optional message, three card blocks and the rest.

    Block lines are ``(line_number, text)`` pairs with tabs expanded.
    """
    if not text.strip():
        raise MissingBlock("empty input")
    lines = [ln.expandtabs(8) for ln in text.replace("\r\n", "\n").replace("\r", "\n").split("\n")]
    i = 0
    message = None
    if lines[0].strip().lower().startswith("message:"):
        j = i
        while j < len(lines) and lines[j].strip():
            j += 1
        message = "\n".join(lines[i:j])
        i = j + 1
    if i >= len(lines):
        raise MissingBlock("no title card")
    title = lines[i]
    i += 1
    blocks = []
    for _ in range(3):
        start = i
        while i < len(lines) and lines[i].strip():
            i += 1
        blocks.append([(n + 1, lines[n]) for n in range(start, i)])
        if i >= len(lines):
            break
        i += 1
    if len(blocks) < 3 or not any(not is_comment_line(t) for _, t in blocks[2]):
        raise MissingBlock("expected cell, surface and data blocks separated by blank lines")
    for n, t in blocks[2]:
        if t[:5].lstrip().startswith("#"):
            raise UnsupportedForm("vertical input format is not implemented", line=n)
    trailing = "\n".join(lines[i:]) if i < len(lines) else ""
    return Blocks(title, message, blocks[0], blocks[1], blocks[2], trailing)


def join_continuations(lines, block: str = "data"):
    """Group block lines into cards.

    Returns ``(cards, tail_comments, warnings)``.  A comment line found in
    the middle of a card is moved in front of it and reported.
    """
    cards: list[RawCard] = []
    pending: list[str] = []
    warns: list[str] = []
    cur: Optional[RawCard] = None
    amp = False
    for lineno, line in lines:
        if is_comment_line(line):
            pending.append(line)
            continue
        cont = cur is not None and (amp or (line[:5] == "     " and line.strip() != ""))
        body, _, com = line.partition("$")
        body = body.rstrip()
        amp = body.endswith("&")
        if amp:
            body = body[:-1]
        if len(line) > 80:
            warns.append(f"line {lineno}: longer than 80 columns")
        if cont:
            if pending:
                warns.append(f"line {lineno}: card interrupted by a comment line; comment moved before the card")
                cur.comments.extend(pending)
                pending = []
            cur.joined_text = (cur.joined_text + " " + body.strip()).strip()
            cur.source_lines = (cur.source_lines[0], lineno)
            cur.raw_lines.append(line)
        else:
            cur = RawCard(body.strip(), (lineno, lineno), [], block, [line], pending)
            pending = []
            cards.append(cur)
        if com.strip() or "$" in line:
            cur.inline_comments.append((len(cur.raw_lines) - 1, com.strip()))
    return cards, pending, warns


def _expand_shorthand(tokens):
    """Expand ``nR`` repeats and ``nJ`` jumps (jump -> ``None``)."""
    out = []
    for tok in tokens:
        t = tok.lower()
        m = re.fullmatch(r"(\d*)([rj])", t)
        if m:
            n = int(m.group(1) or 1)
            if m.group(2) == "r":
                if not out:
                    raise CardSyntaxError("repeat with nothing to repeat")
                out.extend([out[-1]] * n)
            else:
                out.extend([None] * n)
        else:
            out.append(tok)
    return out


def _num(tok: str) -> float:
    try:
        return float(tok)
    except ValueError:
        raise CardSyntaxError(f"expected a number, got {tok!r}") from None


def transform_from_entries(values, degrees: bool = False):
    """Turn tr-card entries (``None`` = jump) into ``(Transform3D, reverse, warnings)``."""
    vals = list(values)
    n = len(vals)
    flag = 1
    if n == 13:
        flag = int(vals[12]) if vals[12] is not None else 1
        vals = vals[:12]
    if flag not in (1, -1):
        raise CardSyntaxError("transformation flag M must be 1 or -1")
    if len(vals) < 3:
        raise CardSyntaxError("transformation needs a displacement vector")
    origin = [0.0 if v is None else v for v in vals[:3]]
    b = vals[3:]
    if len(b) == 0:
        slots = [None] * 9
    elif len(b) == 9:
        slots = b
    elif len(b) == 6:
        slots = b + [None] * 3
    elif len(b) == 5:
        slots = [b[0], b[1], b[2], b[3], None, None, b[4], None, None]
    else:
        raise CardSyntaxError(f"unsupported number of transformation entries ({n})")
    if degrees:
        slots = [None if s is None else algebra.cosd(s) for s in slots]
    m = algebra.complete_rotation(slots)
    warns = []
    if np.linalg.det(m) < 0:
        raise CardSyntaxError("reflections are not supported in transformations")
    err = algebra.orthonormality_error(m)
    if err > algebra.REPAIR_TOL:
        warns.append(f"rotation matrix not orthonormal (error {err:.2e}); repaired by Gram-Schmidt")
        m = algebra.gram_schmidt(m)
    elif err > 1e-13:
        m = algebra.gram_schmidt(m)
    if flag == -1:
        return algebra.reverse_to_forward(m, origin), True, warns
    return Transform3D(m, origin), False, warns


def _parse_transform_text(text: str, degrees: bool):
    vals = [None if v is None else _num(v) for v in _expand_shorthand(text.split())]
    return transform_from_entries(vals, degrees)


def _split_parens(text: str):
    """Split ``text`` into whitespace tokens and ``(...)`` groups."""
    out, i, n = [], 0, len(text)
    while i < n:
        if text[i].isspace():
            i += 1
        elif text[i] == "(":
            j = text.find(")", i)
            if j < 0:
                raise CardSyntaxError("unbalanced parenthesis in parameter")
            out.append(text[i:j + 1])
            i = j + 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] != "(":
                j += 1
            out.append(text[i:j])
            i = j
    return out


def _transform_ref(group: str, degrees: bool, warns):
    inner = group[1:-1].strip()
    if _INT.match(inner):
        return int(inner)
    t, _, w = _parse_transform_text(inner, degrees)
    warns.extend(w)
    return t


def parse_fill(value: str, degrees: bool = False, warns=None) -> Fill:
    warns = [] if warns is None else warns
    toks = _split_parens(value)
    if not toks:
        raise CardSyntaxError("empty fill")
    if ":" in toks[0]:
        if len(toks) < 3:
            raise CardSyntaxError("lattice fill needs three index ranges")
        ranges = []
        for t in toks[:3]:
            lo, _, hi = t.partition(":")
            ranges.append((int(lo), int(hi)))
        items = []
        for t in _expand_shorthand(toks[3:]):
            if t is None:
                raise CardSyntaxError("jump not allowed in fill array")
            if t.startswith("("):
                if not items or items[-1][1] is not None:
                    raise CardSyntaxError("transformation without universe in fill array")
                items[-1] = (items[-1][0], _transform_ref(t, degrees, warns))
            else:
                items.append((int(t), None))
        size = 1
        for lo, hi in ranges:
            size *= hi - lo + 1
        if size != len(items):
            raise CardSyntaxError(f"fill array holds {len(items)} entries, ranges need {size}")
        return Fill(ranges=tuple(ranges), array=items)
    universe = int(toks[0])
    transform = None
    if len(toks) == 2 and toks[1].startswith("("):
        transform = _transform_ref(toks[1], degrees, warns)
    elif len(toks) != 1:
        raise CardSyntaxError(f"cannot read fill value {value!r}")
    return Fill(universe=universe, transform=transform)


def _find_params_start(text: str) -> int:
    depth = 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif depth == 0 and (ch.isalpha() or (ch == "*" and i + 1 < len(text) and text[i + 1].isalpha())):
            if i == 0 or text[i - 1].isspace() or text[i - 1] == ")":
                return i
    return len(text)


def _split_params(text: str):
    """``[(key, value_text)]`` from the keyword part of a cell card."""
    out = []
    pos, n = 0, len(text)
    while pos < n:
        while pos < n and text[pos].isspace():
            pos += 1
        if pos >= n:
            break
        m = _KEY.match(text, pos)
        if not m:
            raise CardSyntaxError(f"cannot read cell parameter at {text[pos:]!r}")
        key = m.group(0)
        pos = m.end()
        while pos < n and text[pos].isspace():
            pos += 1
        if pos < n and text[pos] == "=":
            pos += 1
        start, depth = pos, 0
        while pos < n:
            ch = text[pos]
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
            elif depth == 0 and ch.isspace():
                k = pos
                while k < n and text[k].isspace():
                    k += 1
                nxt = _KEY.match(text, k)
                if nxt and nxt.group(0) not in _NOT_KEYWORDS and not text[k].isdigit():
                    break
            pos += 1
        out.append((key, text[start:pos].strip()))
    return out


def parse_cell_card(raw: RawCard, warns=None) -> CellCard:
    warns = [] if warns is None else warns
    text = raw.joined_text.lower()
    toks = text.split(None, 2)
    if len(toks) < 2:
        raise CardSyntaxError("cell card too short", line=raw.source_lines[0])
    if toks[1] == "like":
        raise UnsupportedForm("'like n but' cell cards are not supported", line=raw.source_lines[0])
    if not _INT.match(toks[0]) or int(toks[0]) <= 0:
        raise CardSyntaxError(f"bad cell number {toks[0]!r}", line=raw.source_lines[0])
    cid = int(toks[0])
    if not _INT.match(toks[1]):
        raise CardSyntaxError(f"bad material number {toks[1]!r}", line=raw.source_lines[0])
    mat = int(toks[1])
    rest = toks[2] if len(toks) > 2 else ""
    density = density_text = None
    if mat != 0:
        dens, _, rest = rest.partition(" ")
        if not dens:
            raise CardSyntaxError("missing density", line=raw.source_lines[0])
        density = _num(dens)
        density_text = dens
    k = _find_params_start(rest)
    geom_text, param_text = rest[:k], rest[k:]
    try:
        geometry = parse_geometry(geom_text)
    except CardSyntaxError as e:
        raise CardSyntaxError(f"cell {cid}: {e}", line=raw.source_lines[0], column=e.column) from None
    params = {}
    for key, value in _split_params(param_text):
        degrees = key.startswith("*")
        base = key.lstrip("*")
        if base in params:
            raise CardSyntaxError(f"cell {cid}: parameter {base!r} given twice", line=raw.source_lines[0])
        try:
            if base in ("u", "lat"):
                params[base] = int(value)
            elif base == "trcl":
                if _INT.match(value):
                    params[base] = int(value)
                else:
                    group = value if value.startswith("(") else f"({value})"
                    params[base] = _transform_ref(group, degrees, warns)
            elif base == "fill":
                params[base] = parse_fill(value, degrees, warns)
            else:
                params[key] = value
        except (ValueError, CardSyntaxError) as e:
            raise CardSyntaxError(f"cell {cid}: bad {key} value: {e}", line=raw.source_lines[0]) from None
    return CellCard(cid, mat, density, geometry, params, raw.comment, density_text,
                    list(raw.raw_lines), list(raw.comments))


def parse_surface_card(raw: RawCard) -> SurfaceCard:
    toks = raw.joined_text.lower().split()
    line = raw.source_lines[0]
    if len(toks) < 2:
        raise CardSyntaxError("surface card too short", line=line)
    modifier = ""
    if toks[0][0] in "*+":
        modifier, toks[0] = toks[0][0], toks[0][1:]
    if not _INT.match(toks[0]) or int(toks[0]) <= 0:
        raise CardSyntaxError(f"bad surface number {toks[0]!r}", line=line)
    sid = int(toks[0])
    i = 1
    transform = periodic = None
    if _INT.match(toks[1]):
        n = int(toks[1])
        if n > 0:
            transform = n
        elif n < 0:
            periodic = -n
        i = 2
    if i >= len(toks):
        raise CardSyntaxError(f"surface {sid}: missing mnemonic", line=line)
    mnemonic = toks[i]
    texts = tuple(toks[i + 1:])
    try:
        coeffs = tuple(float(t) for t in texts)
    except ValueError:
        raise CardSyntaxError(f"surface {sid}: non-numeric coefficient", line=line) from None
    return SurfaceCard(sid, mnemonic, coeffs, modifier, transform, periodic, raw.comment,
                       texts, list(raw.raw_lines), list(raw.comments))


def _card_name(tok: str):
    m = _CARD_NAME.match(tok)
    if not m:
        return None
    return m.group(1), m.group(2), m.group(3), m.group(4)


def _parse_material(num: int, body: str, raw: RawCard) -> MaterialCard:
    body = re.sub(r"\s*=\s*", "=", body)
    toks = body.split()
    options = tuple(t for t in toks if "=" in t)
    pairs = [t for t in toks if "=" not in t]
    if not pairs or len(pairs) % 2:
        raise CardSyntaxError(f"material {num}: expected ZAID/fraction pairs", line=raw.source_lines[0])
    entries = []
    for zaid, frac in zip(pairs[::2], pairs[1::2]):
        z, _, lib = zaid.partition(".")
        entries.append(MaterialEntry(z, lib or None, _num(frac), frac))
    signs = {e.fraction > 0 for e in entries}
    if len(signs) > 1:
        raise CardSyntaxError(f"material {num}: fractions mix atom and weight form", line=raw.source_lines[0])
    return MaterialCard(num, tuple(entries), options, {}, raw.comment,
                        list(raw.raw_lines), list(raw.comments))


def parse_data_cards(raws, warns=None):
    """Returns ``(data_cards, errors)``; aux material cards are attached to their ``m`` card."""
    warns = [] if warns is None else warns
    cards, errors = [], []
    aux_pending = []
    for raw in raws:
        text = raw.joined_text.lower()
        head, _, body = text.partition(" ")
        parts = _card_name(head)
        try:
            if parts is None:
                cards.append(OpaqueCard(head, text, list(raw.raw_lines), list(raw.comments)))
                continue
            star, letters, number, particle = parts
            if letters == "tr" and number:
                entries = [None if v is None else _num(v) for v in _expand_shorthand(body.split())]
                t, reverse, w = transform_from_entries(entries, degrees=bool(star))
                warns.extend(f"tr{number}: {x}" for x in w)
                cards.append(TransformCard(int(number), t, reverse, raw.comment,
                                           list(raw.raw_lines), list(raw.comments)))
            elif letters == "m" and number and not star:
                cards.append(_parse_material(int(number), body, raw))
            elif letters in AUX_KINDS and number and not star:
                aux_pending.append((int(number), AuxCard(letters + particle, body.strip(),
                                                         list(raw.raw_lines), list(raw.comments))))
            elif letters in ("u", "fill", "lat", "trcl") and not number:
                raise UnsupportedForm(f"{letters!r} must be defined in the cell block, not as a data card",
                                      line=raw.source_lines[0])
            else:
                cards.append(OpaqueCard(head, text, list(raw.raw_lines), list(raw.comments)))
        except ParseError as e:
            if e.line is None:
                e = type(e)(str(e), line=raw.source_lines[0])
            errors.append(e)
    mats = {c.id: c for c in cards if isinstance(c, MaterialCard)}
    for num, aux in aux_pending:
        if num in mats:
            mats[num].aux[aux.kind] = aux
        else:
            warns.append(f"{aux.kind}{num} has no matching m{num} card; kept as-is")
            cards.append(OpaqueCard(f"{aux.kind}{num}", f"{aux.kind}{num} {aux.text}", aux.raw, aux.comments))
    return cards, errors


def extract_metadata(trailing: str):
    """Find the JSON object in the text after the data block."""
    dec = json.JSONDecoder()
    objs, rest, i = [], [], 0
    while i < len(trailing):
        j = trailing.find("{", i)
        if j < 0:
            rest.append(trailing[i:])
            break
        try:
            obj, end = dec.raw_decode(trailing, j)
        except ValueError:
            rest.append(trailing[i:j + 1])
            i = j + 1
            continue
        objs.append(obj)
        rest.append(trailing[i:j])
        i = end
    if len(objs) > 1:
        raise MultipleMetadataBlocks("only one JSON metadata string is allowed after the data block")
    if objs and not isinstance(objs[0], dict):
        raise ParseError("metadata must be a JSON object")
    return MetadataBlock(objs[0] if objs else {}), "".join(rest).strip()


def parse_deck(text: str, source_path: str = "") -> Deck:
    from .writer import parse_header

    blocks = split_blocks(text)
    warns: list[str] = []
    errors: list[ParseError] = []

    cell_raws, cell_tail, w = join_continuations(blocks.cell_lines, "cell")
    warns.extend(w)
    surf_raws, surf_tail, w = join_continuations(blocks.surface_lines, "surface")
    warns.extend(w)
    data_raws, data_tail, w = join_continuations(blocks.data_lines, "data")
    warns.extend(w)

    lead = cell_raws[0].comments if cell_raws else cell_tail
    provenance, used = parse_header(lead)
    del lead[:used]
    if provenance is None:
        provenance = ProvenanceNode(source_path)

    cells, surfaces = [], []
    for raw in cell_raws:
        try:
            cells.append(parse_cell_card(raw, warns))
        except ParseError as e:
            errors.append(e)
    for raw in surf_raws:
        try:
            surfaces.append(parse_surface_card(raw))
        except ParseError as e:
            errors.append(e)
    data_cards, errs = parse_data_cards(data_raws, warns)
    errors.extend(errs)

    def check_unique(label, ids):
        seen = set()
        for i in ids:
            if i in seen:
                errors.append(DuplicateId(f"duplicate {label} number {i}"))
            seen.add(i)

    check_unique("cell", [c.id for c in cells])
    check_unique("surface", [s.id for s in surfaces])
    check_unique("transformation", [c.id for c in data_cards if isinstance(c, TransformCard)])
    check_unique("material", [c.id for c in data_cards if isinstance(c, MaterialCard)])

    try:
        metadata, trailing = extract_metadata(blocks.trailing_text)
    except ParseError as e:
        errors.append(e)
        metadata, trailing = MetadataBlock(), ""

    if errors:
        if len(errors) == 1:
            raise errors[0]
        raise ParseError(f"{len(errors)} errors: " + "; ".join(str(e) for e in errors), errors=errors)

    for msg in warns:
        warnings.warn(msg, DeckWarning, stacklevel=2)
    return Deck(
        title=blocks.title,
        cells=cells,
        surfaces=surfaces,
        data_cards=data_cards,
        message=blocks.message,
        metadata=metadata,
        provenance=provenance,
        cumulative_transform=Transform3D.identity(),
        source_path=source_path,
        trailing_text=trailing,
        tail_comments={"cell": cell_tail if cell_raws else [], "surface": surf_tail, "data": data_tail},
        parse_warnings=warns,
    )


def read_deck(path) -> Deck:
    with open(path, encoding="utf-8") as fh:
        return parse_deck(fh.read(), str(path))
