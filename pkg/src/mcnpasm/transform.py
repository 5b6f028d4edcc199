"""Move whole decks by rewriting tr cards, and keep trcl cells MCNP-safe."""
from __future__ import annotations

import warnings
from dataclasses import replace

from . import algebra
from .algebra import Transform3D
from .errors import CapacityExceeded, DeckWarning
from .geometry import cells_in, map_ids, surfaces_in
from .model import Deck, Fill, TransformCard, cell_transform_refs
from .renumber import remap

MAX_TRCL_SURFACE = 999


def _insert_transform_card(deck: Deck, card: TransformCard) -> None:
    """New tr cards go right after the last existing one."""
    idx = -1
    for i, c in enumerate(deck.data_cards):
        if isinstance(c, TransformCard):
            idx = i
    deck.data_cards.insert(idx + 1, card)


def _next_tr_id(deck: Deck) -> int:
    return max((t.id for t in deck.transforms), default=0) + 1


def _vec(v) -> str:
    from .writer import fmt_num
    return "[" + ", ".join(fmt_num(x) for x in v) + "]"


def describe(t: Transform3D) -> str:
    from .writer import transform_entries_text
    return f"Transformation card: {transform_entries_text(t)}"


def transform_deck(deck: Deck, t: Transform3D, description: str = None) -> Deck:
    """Rigidly move every cell of ``deck`` by ``t`` (in place).

    Surface tr cards are composed with the surface rule; trcl/fill
    transforms are conjugated with the cell rule.  A card used by both
    surfaces and cells keeps the surface rule and the cells get a new card.
    Surfaces without a tr card share one new card holding ``t``.
    """
    surf_refs = {s.transform for s in deck.surfaces if s.transform is not None}
    cell_refs = set()
    lattice_refs = False
    for c in deck.cells:
        cell_refs.update(cell_transform_refs(c))
        if c.fill is not None and c.fill.array is not None and any(isinstance(x, int) for x in c.fill.transforms()):
            lattice_refs = True
    if lattice_refs:
        warnings.warn("lattice fill array uses tr-card numbers; check the moved lattice", DeckWarning, stacklevel=2)

    forked = {}
    for i, card in enumerate(deck.data_cards):
        if not isinstance(card, TransformCard):
            continue
        old = card.transform
        if card.id in cell_refs and card.id not in surf_refs:
            new = algebra.compose_cell_transform(old, t)
        else:
            new = algebra.compose_surface_transform(old, t)
            if card.id in cell_refs:
                forked[card.id] = algebra.compose_cell_transform(old, t)
        if new != old:
            deck.data_cards[i] = replace(card, transform=new, raw=None, origin_in_aux=False)

    if not t.is_identity():
        bare = [i for i, s in enumerate(deck.surfaces) if s.transform is None]
        if bare:
            tid = _next_tr_id(deck)
            _insert_transform_card(deck, TransformCard(tid, t))
            for i in bare:
                deck.surfaces[i] = replace(deck.surfaces[i], transform=tid, raw=None)

    fork_ids = {}
    for old_id, tr in forked.items():
        nid = _next_tr_id(deck)
        _insert_transform_card(deck, TransformCard(nid, tr))
        fork_ids[old_id] = nid

    def cell_tr(v):
        if isinstance(v, Transform3D):
            return algebra.compose_cell_transform(v, t)
        if isinstance(v, int):
            return fork_ids.get(v, v)
        return v

    for i, c in enumerate(deck.cells):
        if c.trcl is None and c.fill is None:
            continue
        params = dict(c.params)
        if c.trcl is not None:
            params["trcl"] = cell_tr(c.trcl)
        if c.fill is not None:
            f = c.fill
            if f.array is None:
                params["fill"] = Fill(universe=f.universe, transform=cell_tr(f.transform))
            else:
                params["fill"] = Fill(ranges=f.ranges, array=[(u, cell_tr(x)) for u, x in f.array])
        if params != c.params:
            deck.cells[i] = replace(c, params=params, raw=None)

    deck.cumulative_transform = algebra.compose_surface_transform(deck.cumulative_transform, t)
    prov = deck.provenance
    prov.applied_transforms.append(description or describe(t))
    prov.net_transform = algebra.compose_surface_transform(prov.net_transform, t)
    return deck


def translate_deck(deck: Deck, shift) -> Deck:
    t = Transform3D.translation_only(shift)
    return transform_deck(deck, t, f"Translation of vector: {_vec(shift)}")


def rotate_deck(deck: Deck, axis: str, angle: float, shift=(0, 0, 0)) -> Deck:
    from .writer import fmt_num
    t = algebra.axis_rotation(axis, angle, shift)
    desc = f"Translation: {_vec(shift)} Rotation {axis.upper()}: {fmt_num(angle)}"
    return transform_deck(deck, t, desc)


def rotate_deck_about(deck: Deck, u, angle: float, shift=(0, 0, 0)) -> Deck:
    from .writer import fmt_num
    t = algebra.arbitrary_axis_rotation(u, angle, shift)
    desc = f"Translation: {_vec(shift)} Rotation U {_vec(u)}: {fmt_num(angle)}"
    return transform_deck(deck, t, desc)


def get_cumulative_transform(deck: Deck) -> Transform3D:
    return deck.cumulative_transform


def _trcl_surfaces(deck: Deck) -> tuple[list[int], set[int]]:
    """Surfaces seen by trcl cells (directly or via ``#n``) and the direct ones."""
    by_id = {c.id: c for c in deck.cells}
    seen, direct = {}, set()
    for c in deck.cells:
        if c.trcl is None:
            continue
        direct.update(surfaces_in(c.geometry))
        stack, visited = [c.id], set()
        while stack:
            cid = stack.pop()
            if cid in visited or cid not in by_id:
                continue
            visited.add(cid)
            for s in surfaces_in(by_id[cid].geometry):
                seen.setdefault(s, None)
            stack.extend(cells_in(by_id[cid].geometry))
    return list(seen), direct


def resolve_trcl(deck: Deck, keep=()) -> Deck:
    """Bring every surface used by a trcl cell to an id <= 999 (in place).

    Surfaces are renumbered into the lowest free ids.  Ids listed in
    ``keep`` must not change: those surfaces are duplicated instead and
    only the trcl cells point to the copy.  Running it again is a no-op.
    """
    keep = set(keep)
    needed, direct = _trcl_surfaces(deck)
    high = sorted(s for s in needed if s > MAX_TRCL_SURFACE and (s not in keep or s in direct))
    if not high:
        return deck
    used = {s.id for s in deck.surfaces}
    free = (i for i in range(1, MAX_TRCL_SURFACE + 1) if i not in used)
    renum, dup = {}, {}
    for s in high:
        try:
            nid = next(free)
        except StopIteration:
            raise CapacityExceeded(
                f"no free surface id <= {MAX_TRCL_SURFACE} left for surface {s}") from None
        (dup if s in keep else renum)[s] = nid
    if renum:
        remap(deck, surf_map=renum)
    if dup:
        for old, nid in dup.items():
            src = deck.surface(old)
            idx = deck.surfaces.index(src)
            deck.surfaces.insert(idx + 1, replace(src, id=nid, raw=None, comments=[]))
        for i, c in enumerate(deck.cells):
            if c.trcl is None or not (set(surfaces_in(c.geometry)) & set(dup)):
                continue
            geom = map_ids(c.geometry, surf=lambda s: dup.get(s, s))
            deck.cells[i] = replace(c, geometry=geom, raw=None)
    return deck
