"""Serialize decks back to MCNP text and handle the provenance header.

Cards that still hold their source lines are written back unchanged.
Other cards are formatted fresh, wrapped at 80 columns with a six-blank
continuation indent.  Transformation entries use 15 significant digits.
"""
from __future__ import annotations

import ast
import json
import os
import re

import numpy as np

from .algebra import Transform3D, euler_xzx
from .geometry import format_geometry
from .model import (
    CellCard,
    Deck,
    Fill,
    MaterialCard,
    OpaqueCard,
    ProvenanceNode,
    SurfaceCard,
    TransformCard,
)

WIDTH = 80
INDENT = " " * 6


def fmt15(x: float) -> str:
    s = "%.15g" % float(x)
    return "0" if s == "-0" else s


def fmt_num(x: float) -> str:
    """Short form for values written into descriptions (``60`` not ``60.0``)."""
    x = float(x)
    if x.is_integer():
        return str(int(x))
    return repr(x)


def transform_entries_text(t: Transform3D) -> str:
    vals = list(t.translation) + list(t.rotation.ravel())
    return " ".join(fmt15(v) for v in vals)


def _split_long(tok: str, room: int) -> list[str]:
    if len(tok) <= room or ":" not in tok:
        return [tok]
    parts, cur = [], ""
    for piece in re.split(r"(?<=:)", tok):
        if cur and len(cur) + len(piece) > room:
            parts.append(cur)
            cur = ""
        cur += piece
    if cur:
        parts.append(cur)
    return parts


def wrap_card(text: str, comment: str | None = None) -> list[str]:
    """Wrap a card body into lines of at most 80 columns."""
    room = WIDTH - len(INDENT)
    tokens = []
    for tok in text.split():
        tokens.extend(_split_long(tok, room))
    lines, cur = [], ""
    for tok in tokens:
        limit = WIDTH if not lines else WIDTH
        cand = f"{cur} {tok}" if cur.strip() else (cur + tok)
        if len(cand) > limit and cur.strip():
            lines.append(cur)
            cur = INDENT + tok
        else:
            cur = cand
    lines.append(cur)
    if comment:
        tail = f" $ {comment}"
        if len(lines[-1]) + len(tail) <= WIDTH:
            lines[-1] += tail
        else:
            lines.append(INDENT + "$ " + comment)
    return lines


def format_fill(fill: Fill) -> str:
    def tr_text(t):
        if t is None:
            return ""
        if isinstance(t, Transform3D):
            return f" ({transform_entries_text(t)})"
        return f" ({t})"

    if fill.array is None:
        return f"fill={fill.universe}{tr_text(fill.transform)}"
    ranges = " ".join(f"{lo}:{hi}" for lo, hi in fill.ranges)
    items = " ".join(f"{u}{tr_text(t)}" for u, t in fill.array)
    return f"fill={ranges} {items}"


def format_params(params: dict) -> str:
    out = []
    for key, val in params.items():
        if key == "trcl":
            if isinstance(val, Transform3D):
                out.append(f"trcl=({transform_entries_text(val)})")
            else:
                out.append(f"trcl={val}")
        elif key == "fill":
            out.append(format_fill(val))
        else:
            out.append(f"{key}={val}")
    return " ".join(out)


def cell_lines(c: CellCard) -> list[str]:
    if c.raw is not None:
        return list(c.raw)
    head = f"{c.id} {c.material}"
    if c.material != 0:
        head += " " + (c.density_text or fmt15(c.density))
    body = f"{head} {format_geometry(c.geometry)}"
    params = format_params(c.params)
    if params:
        body += " " + params
    return wrap_card(body, c.comment)


def surface_lines(s: SurfaceCard) -> list[str]:
    if s.raw is not None:
        return list(s.raw)
    body = f"{s.modifier}{s.id}"
    if s.transform is not None:
        body += f" {s.transform}"
    elif s.periodic is not None:
        body += f" -{s.periodic}"
    texts = s.coeff_texts if s.coeff_texts is not None and len(s.coeff_texts) == len(s.coefficients) \
        else [fmt15(x) for x in s.coefficients]
    body += f" {s.mnemonic} " + " ".join(texts)
    return wrap_card(body.rstrip(), s.comment)


def transform_lines(t: TransformCard) -> list[str]:
    if t.raw is not None:
        return list(t.raw)
    return wrap_card(f"tr{t.id} {transform_entries_text(t.transform)}", t.comment)


def material_lines(m: MaterialCard) -> list[str]:
    if m.raw is not None:
        lines = list(m.raw)
    else:
        parts = []
        for e in m.entries:
            z = e.zaid + (f".{e.library}" if e.library else "")
            parts.append(f"{z} {e.fraction_text or fmt15(e.fraction)}")
        parts.extend(m.options)
        lines = wrap_card(f"m{m.id} " + " ".join(parts), m.comment)
    for kind, aux in m.aux.items():
        lines.extend(aux.comments)
        if aux.raw is not None:
            lines.extend(aux.raw)
        else:
            letters, _, particle = kind.partition(":")
            name = f"{letters}{m.id}" + (f":{particle}" if particle else "")
            lines.extend(wrap_card(f"{name} {aux.text}"))
    return lines


def data_lines(card) -> list[str]:
    if isinstance(card, TransformCard):
        return transform_lines(card)
    if isinstance(card, MaterialCard):
        return material_lines(card)
    if card.raw is not None:
        return list(card.raw)
    return wrap_card(card.text)


# provenance header -----------------------------------------------------------

def _details(node: ProvenanceNode, k: int) -> list[str]:
    d = "c" + " " * (6 + 6 * k)
    sub = "c" + " " * (11 + 6 * k)
    out = []
    if node.version_note:
        out.append(f"{d}Version: {node.version_note}")
    for note in node.notes:
        out.append(f"{d}Note: {note}")
    if not node.applied_transforms:
        out.append(f"{d}No transforms were applied")
        return out
    t = node.net_transform
    e = euler_xzx(t.rotation)
    out.append(f"{d}Applied translation: {[float(x) for x in t.translation]!r}")
    out.append(f"{d}Applied Euler XZX angles: a={round(e.a, 10)}, b={round(e.b, 10)}, g={round(e.g, 10)} ")
    out.append(f"{d}Rotation matrix:")
    for row in t.rotation:
        out.append(sub + "[" + " ".join(repr(float(x)) for x in row) + "]")
    out.append(f"{d}List of applied transforms:")
    for desc in node.applied_transforms:
        out.append(sub + desc)
    return out


def _node_lines(node: ProvenanceNode, k: int) -> list[str]:
    out = ["c" + " " * (1 + 6 * k) + node.source_path]
    out.extend(_details(node, k))
    if node.children:
        out.append("c" + " " * (7 + 6 * k) + f"- Files contained in {node.source_path} :")
        for ch in node.children:
            out.extend(_node_lines(ch, k + 1))
    return out


def build_header(prov: ProvenanceNode) -> list[str]:
    out = ["c  - Original file: ", f"c {prov.source_path}"]
    out.extend(_details(prov, 0))
    if prov.children:
        out.append("c  - Inserted files: ")
        for ch in prov.children:
            out.extend(_node_lines(ch, 0))
    return out


def _split_comment(line: str):
    body = line[1:]
    s = len(body) - len(body.lstrip(" "))
    return s, body[s:].rstrip()


_DETAIL_KEYS = ("No transforms were applied", "Version: ", "Note: ", "Applied translation: ")


def parse_header(lines: list[str]):
    """Read a header written by :func:`build_header`.

    Returns ``(root, n_lines_used)``, or ``(None, 0)`` when ``lines`` does
    not start with a header.
    """
    if not lines or not lines[0].rstrip().lower().startswith("c  - original file:"):
        return None, 0
    items = [_split_comment(ln) for ln in lines]
    pos = 1

    def at(i):
        return items[i] if i < len(items) else (None, None)

    def is_path(i, k):
        # every node writes at least one detail line, which tells it apart
        # from an ordinary comment that happens to follow the header
        s, text = at(i)
        if s != 1 + 6 * k or not text or text.startswith("- "):
            return False
        s2, nxt = at(i + 1)
        return s2 == 6 + 6 * k and nxt is not None and nxt.startswith(_DETAIL_KEYS)

    def read_details(node, k):
        nonlocal pos
        d, sub = 6 + 6 * k, 11 + 6 * k
        translation = rows = None
        while pos < len(items):
            s, text = items[pos]
            if s != d:
                break
            if text == "No transforms were applied":
                pos += 1
            elif text.startswith("Version: "):
                node.version_note = text[len("Version: "):]
                pos += 1
            elif text.startswith("Note: "):
                node.notes.append(text[len("Note: "):])
                pos += 1
            elif text.startswith("Applied translation: "):
                translation = ast.literal_eval(text[len("Applied translation: "):])
                pos += 1
            elif text.startswith("Applied Euler XZX angles:"):
                pos += 1
            elif text == "Rotation matrix:":
                pos += 1
                rows = []
                for _ in range(3):
                    s2, row = at(pos)
                    if s2 != sub or not row.startswith("["):
                        raise ValueError("bad rotation matrix in header")
                    rows.append([float(x) for x in row.strip("[]").split()])
                    pos += 1
            elif text == "List of applied transforms:":
                pos += 1
                while at(pos)[0] == sub:
                    node.applied_transforms.append(items[pos][1])
                    pos += 1
            else:
                break
        if translation is not None or rows is not None:
            node.net_transform = Transform3D(
                np.array(rows if rows is not None else np.eye(3)),
                translation if translation is not None else (0, 0, 0),
            )

    def read_node(k):
        nonlocal pos
        node = ProvenanceNode(items[pos][1])
        pos += 1
        read_details(node, k)
        s, text = at(pos)
        if s == 7 + 6 * k and text.startswith("- Files contained in "):
            pos += 1
            while is_path(pos, k + 1):
                node.children.append(read_node(k + 1))
        return node

    try:
        if not is_path(pos, 0):
            return None, 0
        root = read_node(0)
        s, text = at(pos)
        if s == 2 and text == "- Inserted files:":
            pos += 1
            while is_path(pos, 0):
                root.children.append(read_node(0))
    except (ValueError, SyntaxError):
        return None, 0
    return root, pos


# deck ------------------------------------------------------------------------

def deck_lines(deck: Deck) -> list[str]:
    out = []
    if deck.message is not None:
        out.append(deck.message)
        out.append("")
    out.append(deck.title)
    out.extend(build_header(deck.provenance))
    tails = deck.tail_comments or {}
    for c in deck.cells:
        out.extend(c.comments)
        out.extend(cell_lines(c))
    out.extend(tails.get("cell", []))
    out.append("")
    for s in deck.surfaces:
        out.extend(s.comments)
        out.extend(surface_lines(s))
    out.extend(tails.get("surface", []))
    out.append("")
    for card in deck.data_cards:
        out.extend(card.comments)
        out.extend(data_lines(card))
    out.extend(tails.get("data", []))
    if deck.trailing_text:
        out.append("")
        out.append(deck.trailing_text)
    if deck.metadata.groups:
        out.append("")
        out.extend(json.dumps(deck.metadata.groups, indent=2).split("\n"))
    return out


def write_deck(deck: Deck, destination=None) -> str:
    text = "\n".join(deck_lines(deck)) + "\n"
    if destination is not None:
        parent = os.path.dirname(os.path.abspath(destination))
        os.makedirs(parent, exist_ok=True)
        with open(destination, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text
