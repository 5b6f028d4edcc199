"""Cut a set of cells out of a deck into a new assemblable deck."""
from __future__ import annotations

import copy
import warnings

from .algebra import Transform3D
from .errors import DeckWarning, GasOrGraveyardSelected, UnknownCell
from .geometry import CellComplement, Intersection, SurfaceSense, cells_in, surfaces_in
from .model import (
    CellCard,
    Deck,
    MaterialCard,
    MetadataBlock,
    OpaqueCard,
    ProvenanceNode,
    RESERVED_KEYS,
    SurfaceCard,
    TransformCard,
    cell_transform_refs,
)

SPHERE_RADIUS = 2000.0  # cm
KEPT_DATA_CARDS = ("mode",)
_DROP_PARAMS = ("u", "fill", "trcl", "lat")


def dependency_closure(deck: Deck, cell_ids):
    """Everything the given cells need, each list in deck order.

    Returns ``(cells, surfaces, transforms, materials, universes)`` as id lists.
    """
    by_id = {c.id: c for c in deck.cells}
    for cid in cell_ids:
        if cid not in by_id:
            raise UnknownCell(cid)
    members = {}
    for c in deck.cells:
        if c.universe:
            members.setdefault(c.universe, []).append(c.id)

    cells, surfs, trs, mats, unis = set(), set(), set(), set(), set()
    work = list(cell_ids)
    while work:
        cid = work.pop()
        if cid in cells:
            continue
        if cid not in by_id:
            raise UnknownCell(cid)
        cells.add(cid)
        c = by_id[cid]
        work.extend(cells_in(c.geometry))
        surfs.update(surfaces_in(c.geometry))
        trs.update(cell_transform_refs(c))
        if c.material:
            mats.add(c.material)
        if c.fill is not None:
            for u in c.fill.universes():
                unis.add(u)
                work.extend(members.get(u, []))

    surf_by_id = {s.id: s for s in deck.surfaces}
    todo = list(surfs)
    while todo:
        sid = todo.pop()
        s = surf_by_id.get(sid)
        if s is None:
            continue
        if s.transform is not None:
            trs.add(s.transform)
        if s.periodic is not None and s.periodic not in surfs:
            surfs.add(s.periodic)
            todo.append(s.periodic)

    def ordered(ids, src):
        return [i for i in src if i in ids]

    return (
        ordered(cells, [c.id for c in deck.cells]),
        ordered(surfs, [s.id for s in deck.surfaces]),
        ordered(trs, [t.id for t in deck.transforms]),
        ordered(mats, [m.id for m in deck.materials]),
        sorted(unis),
    )


def extract(deck: Deck, cell_ids) -> Deck:
    """New deck holding ``cell_ids`` and their dependencies.

    The result gets a gas cell (ambient material of the source) limited by
    an origin-centred ``so 2000`` sphere and a graveyard outside it.
    Original ids are kept.
    """
    cell_ids = list(cell_ids)
    if len(deck.cells) >= 2:
        special = {deck.cells[-2].id, deck.cells[-1].id}
        picked = special.intersection(cell_ids)
        if picked:
            raise GasOrGraveyardSelected(
                f"cells {sorted(picked)} are the gas/graveyard cells of the source deck")
    cells, surfs, trs, mats, _ = dependency_closure(deck, cell_ids)

    src_gas = deck.cells[-2] if len(deck.cells) >= 2 else None
    src_grave = deck.cells[-1] if len(deck.cells) >= 2 else None
    if src_gas is None:
        warnings.warn("source deck has no gas cell; extracted gas cell is void", DeckWarning, stacklevel=2)
    gas_mat = src_gas.material if src_gas is not None else 0
    if gas_mat and gas_mat not in mats:
        mats = [m.id for m in deck.materials if m.id in set(mats) | {gas_mat}]

    keep_cells, keep_surfs = set(cells), set(surfs)
    keep_trs, keep_mats = set(trs), set(mats)
    out_cells = [copy.deepcopy(c) for c in deck.cells if c.id in keep_cells]
    out_surfs = [copy.deepcopy(s) for s in deck.surfaces if s.id in keep_surfs]
    out_data = []
    for card in deck.data_cards:
        if isinstance(card, TransformCard) and card.id in keep_trs:
            out_data.append(copy.deepcopy(card))
        elif isinstance(card, MaterialCard) and card.id in keep_mats:
            out_data.append(copy.deepcopy(card))
        elif isinstance(card, OpaqueCard) and card.name.split(":")[0] in KEPT_DATA_CARDS:
            out_data.append(copy.deepcopy(card))

    sphere_id = max(surfs, default=0) + 1
    sphere = SurfaceCard(sphere_id, "so", (SPHERE_RADIUS,), coeff_texts=("2000",),
                         comment="bounding sphere of extracted cells")
    out_surfs.append(sphere)

    top = [c.id for c in out_cells if not c.universe]
    gas_id = max(cells) + 1
    grave_id = gas_id + 1
    inner = SurfaceSense(sphere_id, -1)
    gas_geom = Intersection((inner,) + tuple(CellComplement(i) for i in top)) if top else inner

    def params_of(src):
        if src is None:
            return {}
        return {k: v for k, v in src.params.items() if k not in _DROP_PARAMS}

    gas = CellCard(gas_id, gas_mat, src_gas.density if gas_mat else None, gas_geom,
                   params_of(src_gas), "gas", src_gas.density_text if gas_mat else None)
    grave = CellCard(grave_id, 0, None, SurfaceSense(sphere_id, 1), params_of(src_grave), "graveyard")
    out_cells.extend([gas, grave])

    ids = {"cell": keep_cells, "surf": keep_surfs, "trans": keep_trs}
    groups = {}
    for name, group in deck.metadata.groups.items():
        ok = isinstance(group, dict) and all(
            v in ids[k] for k in RESERVED_KEYS if k in ids and isinstance(group.get(k), list)
            for v in group[k])
        if ok:
            groups[name] = copy.deepcopy(group)
        else:
            warnings.warn(f"metadata group {name!r} refers to cards outside the extraction; dropped",
                          DeckWarning, stacklevel=2)

    source = deck.source_path or deck.provenance.source_path
    prov = ProvenanceNode(source, notes=[
        f"extracted from {source} cells {sorted(cell_ids)}",
        f"bounding sphere so {SPHERE_RADIUS:g} centered at origin",
    ])
    return Deck(
        title=deck.title,
        cells=out_cells,
        surfaces=out_surfs,
        data_cards=out_data,
        metadata=MetadataBlock(groups),
        provenance=prov,
        cumulative_transform=Transform3D.identity(),
        source_path=source,
        tail_comments={},
    )
