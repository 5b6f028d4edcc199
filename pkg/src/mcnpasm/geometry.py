"""Boolean cell-geometry expressions: parsing, formatting, id rewriting.

Blank means intersection, ``:`` union, ``#n`` the complement of cell ``n``
and ``#(...)`` the complement of an expression.  Complement binds tightest,
then intersection, then union.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Union as TUnion

from .errors import CardSyntaxError


@dataclass(frozen=True)
class SurfaceSense:
    surface: int
    sign: int  # +1 outside / positive side, -1 inside
    facet: Optional[int] = None
    parens: bool = field(default=False, compare=False)


@dataclass(frozen=True)
class CellComplement:
    cell: int
    parens: bool = field(default=False, compare=False)


@dataclass(frozen=True)
class Complement:
    child: "Expr"
    parens: bool = field(default=False, compare=False)


@dataclass(frozen=True)
class Intersection:
    children: tuple
    parens: bool = field(default=False, compare=False)

    def __post_init__(self):
        if len(self.children) < 2:
            raise ValueError("intersection needs at least two operands")


@dataclass(frozen=True)
class Union:
    children: tuple
    parens: bool = field(default=False, compare=False)

    def __post_init__(self):
        if len(self.children) < 2:
            raise ValueError("union needs at least two operands")


Expr = TUnion[SurfaceSense, CellComplement, Complement, Intersection, Union]

_TOKEN = re.compile(r"\s*(?:(\()|(\))|(:)|(#)|([+-]?\d+(?:\.\d+)?))")


def _tokenize(text: str):
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise CardSyntaxError(f"unexpected character {text[pos]!r} in geometry", column=pos + 1)
        kind = m.lastindex
        out.append((kind, m.group(kind), m.start(kind) + 1))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None, None)

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def union(self):
        items = [self.inter()]
        while self.peek()[0] == 3:
            self.take()
            items.append(self.inter())
        return items[0] if len(items) == 1 else Union(tuple(items))

    def inter(self):
        items = []
        while self.peek()[0] in (1, 4, 5):
            items.append(self.factor())
        if not items:
            _, val, col = self.peek()
            raise CardSyntaxError(f"expected geometry operand, got {val!r}", column=col)
        return items[0] if len(items) == 1 else Intersection(tuple(items))

    def factor(self):
        kind, val, col = self.take()
        if kind == 1:
            node = self.union()
            self.expect_close(col)
            return replace(node, parens=True)
        if kind == 4:
            kind2, val2, col2 = self.take()
            if kind2 == 1:
                node = self.union()
                self.expect_close(col2)
                return Complement(node)
            if kind2 == 5 and val2.isdigit():
                return CellComplement(int(val2))
            raise CardSyntaxError("'#' must be followed by a cell number or '('", column=col)
        head, _, facet = val.partition(".")
        n = int(head)
        if n == 0:
            raise CardSyntaxError("surface number 0 in geometry", column=col)
        return SurfaceSense(abs(n), -1 if n < 0 else 1, int(facet) if facet else None)

    def expect_close(self, col):
        kind, _, _ = self.take()
        if kind != 2:
            raise CardSyntaxError("unbalanced parenthesis", column=col)


def parse_geometry(text: str) -> Expr:
    p = _Parser(text)
    if not p.toks:
        raise CardSyntaxError("empty geometry")
    node = p.union()
    if p.i != len(p.toks):
        _, val, col = p.peek()
        raise CardSyntaxError(f"unexpected {val!r} in geometry", column=col)
    return node


def _core(node) -> str:
    if isinstance(node, SurfaceSense):
        s = ("-" if node.sign < 0 else "") + str(node.surface)
        return s + (f".{node.facet}" if node.facet is not None else "")
    if isinstance(node, CellComplement):
        return f"#{node.cell}"
    if isinstance(node, Complement):
        return "#(" + _core(node.child) + ")"
    if isinstance(node, Intersection):
        return " ".join(_fmt(c, Intersection) for c in node.children)
    return ":".join(_fmt(c, Union) for c in node.children)


def _fmt(node, parent) -> str:
    s = _core(node)
    wrap = node.parens or (
        parent is not None
        and isinstance(node, (Intersection, Union))
        and (isinstance(node, parent) or (isinstance(node, Union) and parent is Intersection))
    )
    return f"({s})" if wrap else s


def format_geometry(node: Expr) -> str:
    return _fmt(node, None)


def walk(node):
    yield node
    if isinstance(node, Complement):
        yield from walk(node.child)
    elif isinstance(node, (Intersection, Union)):
        for c in node.children:
            yield from walk(c)


def surfaces_in(node) -> list[int]:
    """Referenced surface ids in order of first appearance."""
    seen = {}
    for n in walk(node):
        if isinstance(n, SurfaceSense):
            seen.setdefault(n.surface, None)
    return list(seen)


def cells_in(node) -> list[int]:
    seen = {}
    for n in walk(node):
        if isinstance(n, CellComplement):
            seen.setdefault(n.cell, None)
    return list(seen)


def map_ids(node, surf: Callable[[int], int] = None, cell: Callable[[int], int] = None):
    """Return a copy of ``node`` with surface/cell ids passed through the maps."""
    if isinstance(node, SurfaceSense):
        return replace(node, surface=surf(node.surface)) if surf else node
    if isinstance(node, CellComplement):
        return replace(node, cell=cell(node.cell)) if cell else node
    if isinstance(node, Complement):
        return replace(node, child=map_ids(node.child, surf, cell))
    return replace(node, children=tuple(map_ids(c, surf, cell) for c in node.children))


def intersect_with(base, extra):
    """``base`` AND ``extra``; ``extra`` is kept in its own parentheses."""
    if isinstance(extra, (Intersection, Union)) and not extra.parens:
        extra = replace(extra, parens=True)
    if isinstance(base, Intersection) and not base.parens:
        return Intersection(base.children + (extra,))
    return Intersection((base, extra))


def intersect_all(base, extras):
    items = list(base.children) if isinstance(base, Intersection) and not base.parens else [base]
    items.extend(extras)
    return items[0] if len(items) == 1 else Intersection(tuple(items))
