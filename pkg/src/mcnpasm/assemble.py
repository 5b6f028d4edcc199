"""Combine decks: insertion by bounding surface or by cell exclusion."""
from __future__ import annotations

import copy
import os
import warnings
from dataclasses import replace
from decimal import Decimal, InvalidOperation

from .errors import DeckWarning, UnsupportedBoundingExpression
from .extract import dependency_closure
from .geometry import CellComplement, intersect_all, intersect_with, walk
from .metadata import merge_metadata
from .model import Deck, MaterialCard, OpaqueCard, TransformCard, require_assemblable
from .renumber import consecutive_map, remap

LOCATIONS = ("default", "inside", "outside")


def _fraction_key(e) -> Decimal:
    try:
        return Decimal(e.fraction_text or repr(e.fraction)).normalize()
    except InvalidOperation:
        return Decimal(repr(e.fraction)).normalize()


def _material_key(m: MaterialCard):
    entries = sorted((e.zaid.lower(), (e.library or "").lower(), _fraction_key(e)) for e in m.entries)
    options = tuple(sorted(" ".join(o.split()).lower() for o in m.options))
    aux = tuple(sorted((k, " ".join(a.text.split()).lower()) for k, a in m.aux.items()))
    return entries, options, aux


def materials_equal(a: MaterialCard, b: MaterialCard) -> bool:
    """Same nuclides, libraries, fractions and attached mt/mx/mpn cards (ids ignored)."""
    return _material_key(a) == _material_key(b)


def _category_map(host_ids, guest_ids) -> dict:
    """Renumber the whole guest category after the host maximum if any id clashes."""
    if not set(host_ids) & set(guest_ids):
        return {}
    return consecutive_map(list(guest_ids), max(host_ids) + 1)


def _material_map(host: Deck, guest: Deck):
    """Guest material id -> target id, plus the set of guest ids that reuse a host card."""
    mapping, reused = {}, set()
    taken = {m.id for m in host.materials}
    guest_ids = [m.id for m in guest.materials]
    for m in guest.materials:
        same = next((h for h in host.materials if materials_equal(h, m)), None)
        if same is not None:
            mapping[m.id] = same.id
            reused.add(m.id)
    for m in guest.materials:
        if m.id in reused:
            continue
        if m.id not in taken:
            target = m.id
        else:
            target = max(taken | set(guest_ids) | set(mapping.values())) + 1
        mapping[m.id] = target
        taken.add(target)
    return {k: v for k, v in mapping.items() if k != v}, reused


def _align_guest(host: Deck, guest: Deck):
    cmap = _category_map([c.id for c in host.cells], [c.id for c in guest.cells])
    smap = _category_map([s.id for s in host.surfaces], [s.id for s in guest.surfaces])
    tmap = _category_map([t.id for t in host.transforms], [t.id for t in guest.transforms])
    hu = sorted({c.universe for c in host.cells if c.universe})
    gu = sorted({c.universe for c in guest.cells if c.universe})
    umap = _category_map(hu, gu)
    mmap, reused = _material_map(host, guest)
    reused_targets = {mmap.get(i, i) for i in reused}
    remap(guest, cmap, smap, tmap, mmap, umap)
    return reused_targets


def _insert_after_last(cards: list, kind, new: list) -> None:
    idx = -1
    for i, c in enumerate(cards):
        if isinstance(c, kind):
            idx = i
    cards[idx + 1:idx + 1] = new


def _splice(host: Deck, guest: Deck, cells, surf_ids, tr_ids, mat_ids, reused) -> None:
    pos = len(host.cells) - 2
    host.cells[pos:pos] = cells
    host.surfaces.extend(s for s in guest.surfaces if s.id in surf_ids)
    _insert_after_last(host.data_cards, TransformCard,
                       [t for t in guest.transforms if t.id in tr_ids])
    _insert_after_last(host.data_cards, MaterialCard,
                       [m for m in guest.materials if m.id in mat_ids and m.id not in reused])
    host_texts = {" ".join(c.text.split()) for c in host.other_data_cards}
    dropped = sorted({c.name for c in guest.data_cards
                      if isinstance(c, OpaqueCard) and " ".join(c.text.split()) not in host_texts})
    if dropped:
        warnings.warn(f"data cards of inserted deck dropped: {', '.join(dropped)}", DeckWarning, stacklevel=3)
    host.metadata = merge_metadata(host.metadata, guest.metadata,
                                   os.path.basename(guest.provenance.source_path or guest.source_path or "guest"))
    host.provenance.children.append(guest.provenance)


def insert(host: Deck, guest: Deck, location: str = "default") -> Deck:
    """Place ``guest`` in ``host`` using the guest bounding surface (in place on host).

    ``default`` adds the guest exterior to the host gas and graveyard cells,
    ``inside`` to the gas cell only, ``outside`` to the graveyard only.
    """
    if location not in LOCATIONS:
        raise ValueError(f"location must be one of {LOCATIONS}")
    require_assemblable(host, "host")
    require_assemblable(guest, "guest")
    if any(isinstance(n, CellComplement) for n in walk(guest.cells[-1].geometry)):
        raise UnsupportedBoundingExpression(
            "guest graveyard uses a cell complement; use insert_cells instead")
    if any(h[0] == "insert_cells" for h in host.history):
        warnings.warn("insert after insert_cells on the same host makes the gas cell complex; "
                      "prefer insert before insert_cells", DeckWarning, stacklevel=2)
    g = copy.deepcopy(guest)
    reused = _align_guest(host, g)
    bound = g.cells[-1].geometry
    body = g.cells[:-1]
    _splice(host, g, body, {s.id for s in g.surfaces}, {t.id for t in g.transforms},
            {m.id for m in g.materials}, reused)
    n = len(host.cells)
    if location in ("default", "inside"):
        gas = host.cells[n - 2]
        host.cells[n - 2] = replace(gas, geometry=intersect_with(gas.geometry, bound), raw=None)
    if location in ("default", "outside"):
        grave = host.cells[n - 1]
        host.cells[n - 1] = replace(grave, geometry=intersect_with(grave.geometry, bound), raw=None)
    host.history.append(("insert", g.name))
    return host


def insert_cells(host: Deck, guest: Deck) -> Deck:
    """Place ``guest`` in ``host`` by excluding its cells from the host gas cell.

    The last two guest cells (gas and graveyard) are discarded, as are
    cards only they used.
    """
    require_assemblable(host, "host")
    if guest.provenance.children or any(h[0] == "insert" for h in guest.history):
        warnings.warn("guest already contains inserted decks; excluding its cells makes the host gas "
                      "cell complex, prefer insert", DeckWarning, stacklevel=2)
    g = copy.deepcopy(guest)
    reused = _align_guest(host, g)
    body = g.cells[:-2] if len(g.cells) >= 2 else []
    if body:
        cells, surfs, trs, mats, _ = dependency_closure(g, [c.id for c in body])
        keep = set(cells)
        body = [c for c in g.cells if c.id in keep]
    else:
        surfs, trs, mats = [], [], []
    _splice(host, g, body, set(surfs), set(trs), set(mats), reused)
    top = [CellComplement(c.id) for c in body if not c.universe]
    if top:
        n = len(host.cells)
        gas = host.cells[n - 2]
        host.cells[n - 2] = replace(gas, geometry=intersect_all(gas.geometry, top), raw=None)
    host.history.append(("insert_cells", g.name))
    return host
