"""Identifier substitution with full cross-reference rewriting."""
from __future__ import annotations

from dataclasses import replace
from typing import Optional

from .errors import CollisionError
from .geometry import map_ids
from .model import Deck, Fill, MaterialCard, RESERVED_KEYS, TransformCard


def _lookup(mapping: Optional[dict]):
    if not mapping:
        return lambda i: i
    return lambda i: mapping.get(i, i)


def _check(label: str, ids, mapping):
    if not mapping:
        return
    f = _lookup(mapping)
    seen = {}
    for i in ids:
        j = f(i)
        if j in seen:
            raise CollisionError(
                f"{label} {i} would be renumbered to {j}, already used by {label} {seen[j]}")
        seen[j] = i


def _map_fill(fill: Fill, fu, ft) -> Fill:
    def tr(t):
        return ft(t) if isinstance(t, int) else t

    if fill.array is None:
        return Fill(universe=fu(fill.universe) if fill.universe else fill.universe,
                    transform=tr(fill.transform))
    return Fill(ranges=fill.ranges,
                array=[(fu(u) if u and u > 0 else u, tr(t)) for u, t in fill.array])


def remap(deck: Deck, cell_map=None, surf_map=None, trans_map=None,
          mat_map=None, universe_map=None) -> Deck:
    """Substitute ids in place and return ``deck``.

    Cards whose content changes lose their source lines and are formatted
    fresh by the writer; the others keep their exact text.  Opaque data
    cards (tallies, sources, ...) are never rewritten.
    """
    _check("cell", [c.id for c in deck.cells], cell_map)
    _check("surface", [s.id for s in deck.surfaces], surf_map)
    _check("transform", [t.id for t in deck.transforms], trans_map)
    _check("material", [m.id for m in deck.materials], mat_map)
    _check("universe", sorted({c.universe for c in deck.cells if c.universe}), universe_map)
    fc, fs, ft = _lookup(cell_map), _lookup(surf_map), _lookup(trans_map)
    fm, fu = _lookup(mat_map), _lookup(universe_map)

    for i, c in enumerate(deck.cells):
        params = {}
        for key, val in c.params.items():
            if key == "u":
                params[key] = fu(abs(val)) * (1 if val > 0 else -1)
            elif key == "trcl" and isinstance(val, int):
                params[key] = ft(val)
            elif key == "fill":
                params[key] = _map_fill(val, fu, ft)
            else:
                params[key] = val
        new = replace(c, id=fc(c.id), material=fm(c.material) if c.material else 0,
                      geometry=map_ids(c.geometry, fs, fc), params=params, raw=None)
        if new != c:
            deck.cells[i] = new

    for i, s in enumerate(deck.surfaces):
        new = replace(s, id=fs(s.id),
                      transform=ft(s.transform) if s.transform is not None else None,
                      periodic=fs(s.periodic) if s.periodic is not None else None, raw=None)
        if new != s:
            deck.surfaces[i] = new

    for i, card in enumerate(deck.data_cards):
        if isinstance(card, TransformCard):
            if ft(card.id) != card.id:
                deck.data_cards[i] = replace(card, id=ft(card.id), raw=None)
        elif isinstance(card, MaterialCard):
            if fm(card.id) != card.id:
                aux = {k: replace(a, raw=None) for k, a in card.aux.items()}
                deck.data_cards[i] = replace(card, id=fm(card.id), aux=aux, raw=None)

    fmap = {"cell": fc, "surf": fs, "trans": ft}
    for group in deck.metadata.groups.values():
        if not isinstance(group, dict):
            continue
        for key in RESERVED_KEYS:
            if key in fmap and isinstance(group.get(key), list):
                group[key] = [fmap[key](v) if isinstance(v, int) else v for v in group[key]]
    return deck


def consecutive_map(ids, start: int) -> dict:
    return {old: start + k for k, old in enumerate(ids)}


def renumber(deck: Deck, cell: Optional[int] = None, surf: Optional[int] = None,
             trans: Optional[int] = None) -> Deck:
    """Renumber cells, surfaces and tr cards consecutively in block order.

    A ``None`` start leaves that category alone.  Materials and universes
    are never renumbered here.
    """
    for name, start in (("cell", cell), ("surf", surf), ("trans", trans)):
        if start is not None and start < 1:
            raise ValueError(f"{name} start must be >= 1")
    cmap = consecutive_map([c.id for c in deck.cells], cell) if cell is not None else None
    smap = consecutive_map([s.id for s in deck.surfaces], surf) if surf is not None else None
    tmap = consecutive_map([t.id for t in deck.transforms], trans) if trans is not None else None
    return remap(deck, cmap, smap, tmap)
