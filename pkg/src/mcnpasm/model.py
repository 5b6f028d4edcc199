"""In-memory representation of an MCNP input deck.

Cards keep the source lines they were read from (``raw``).  An operation
that changes a card builds a new card without ``raw`` and the writer
formats that one fresh; untouched cards are written back byte for byte.
"""
from __future__ import annotations

import copy
import os
from dataclasses import dataclass, field
from typing import Optional, Union

from .algebra import Transform3D
from .errors import NotAssemblable
from .geometry import CellComplement, Expr, cells_in, surfaces_in, walk

RESERVED_KEYS = ("cell", "surf", "trans", "comment")

# allowed coefficient counts per surface mnemonic
SURFACE_ARITY = {
    "p": (4, 9), "px": (1,), "py": (1,), "pz": (1,),
    "so": (1,), "s": (4,), "sx": (2,), "sy": (2,), "sz": (2,),
    "c/x": (3,), "c/y": (3,), "c/z": (3,), "cx": (1,), "cy": (1,), "cz": (1,),
    "k/x": (4, 5), "k/y": (4, 5), "k/z": (4, 5), "kx": (2, 3), "ky": (2, 3), "kz": (2, 3),
    "sq": (10,), "gq": (10,), "tx": (6,), "ty": (6,), "tz": (6,),
    "x": (2, 4, 6), "y": (2, 4, 6), "z": (2, 4, 6),
    "box": (9, 12), "rpp": (6,), "sph": (4,), "rcc": (7,), "rhp": (9, 15), "hex": (9, 15),
    "rec": (10, 12), "trc": (8,), "ell": (7,), "wed": (12,), "arb": (30,),
}

# cell parameters that MCNP also accepts as data cards (one entry per cell)
CELL_PARAM_CARDS = ("imp", "vol", "pwt", "ext", "fcl", "wwn", "dxc", "nonu", "pd", "tmp", "u", "fill", "lat", "trcl", "elpt", "cosy", "bflcl", "unc")


@dataclass
class Fill:
    """``fill`` value: one universe, or a lattice array over index ranges.

    ``transform`` is a tr-card number, an inline :class:`Transform3D`, or
    ``None``.  Array entries are ``(universe, transform)`` pairs.
    """

    universe: Optional[int] = None
    transform: Union[int, Transform3D, None] = None
    ranges: Optional[tuple] = None
    array: Optional[list] = None

    def universes(self) -> list[int]:
        if self.array is None:
            return [self.universe] if self.universe else []
        out = {}
        for u, _ in self.array:
            if u and u > 0:
                out.setdefault(u, None)
        return list(out)

    def transforms(self) -> list:
        if self.array is None:
            return [] if self.transform is None else [self.transform]
        return [t for _, t in self.array if t is not None]


@dataclass
class CellCard:
    id: int
    material: int
    density: Optional[float]
    geometry: Expr
    params: dict = field(default_factory=dict)
    comment: Optional[str] = None
    density_text: Optional[str] = field(default=None, compare=False)
    raw: Optional[list] = field(default=None, compare=False, repr=False)
    comments: list = field(default_factory=list, compare=False, repr=False)

    @property
    def universe(self) -> Optional[int]:
        u = self.params.get("u")
        return abs(u) if u else None

    @property
    def trcl(self):
        return self.params.get("trcl")

    @property
    def fill(self) -> Optional[Fill]:
        return self.params.get("fill")


@dataclass
class SurfaceCard:
    id: int
    mnemonic: str
    coefficients: tuple
    modifier: str = ""  # "", "*" reflective, "+" white
    transform: Optional[int] = None
    periodic: Optional[int] = None
    comment: Optional[str] = None
    coeff_texts: Optional[tuple] = field(default=None, compare=False, repr=False)
    raw: Optional[list] = field(default=None, compare=False, repr=False)
    comments: list = field(default_factory=list, compare=False, repr=False)


@dataclass
class TransformCard:
    id: int
    transform: Transform3D
    origin_in_aux: bool = field(default=False, compare=False)
    comment: Optional[str] = None
    raw: Optional[list] = field(default=None, compare=False, repr=False)
    comments: list = field(default_factory=list, compare=False, repr=False)


@dataclass(frozen=True)
class MaterialEntry:
    zaid: str
    library: Optional[str]
    fraction: float
    fraction_text: Optional[str] = field(default=None, compare=False)


@dataclass
class AuxCard:
    """``mt``/``mx``/``mpn`` card attached to a material; ``kind`` may carry a particle (``mx:p``)."""

    kind: str
    text: str
    raw: Optional[list] = field(default=None, compare=False, repr=False)
    comments: list = field(default_factory=list, compare=False, repr=False)


@dataclass
class MaterialCard:
    id: int
    entries: tuple
    options: tuple = ()
    aux: dict = field(default_factory=dict)
    comment: Optional[str] = None
    raw: Optional[list] = field(default=None, compare=False, repr=False)
    comments: list = field(default_factory=list, compare=False, repr=False)


@dataclass
class OpaqueCard:
    name: str
    text: str
    raw: Optional[list] = field(default=None, compare=False, repr=False)
    comments: list = field(default_factory=list, compare=False, repr=False)


DataCard = Union[TransformCard, MaterialCard, OpaqueCard]


@dataclass
class MetadataBlock:
    groups: dict = field(default_factory=dict)

    def __bool__(self):
        return bool(self.groups)


@dataclass
class ProvenanceNode:
    source_path: str
    version_note: Optional[str] = None
    applied_transforms: list = field(default_factory=list)
    net_transform: Transform3D = field(default_factory=Transform3D.identity)
    children: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def paths(self) -> list[str]:
        out = [self.source_path]
        for c in self.children:
            out.extend(c.paths())
        return out


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    message: str
    locator: str = ""

    def __str__(self):
        loc = f" [{self.locator}]" if self.locator else ""
        return f"{self.severity}: {self.message}{loc}"


@dataclass
class Deck:
    title: str
    cells: list = field(default_factory=list)
    surfaces: list = field(default_factory=list)
    data_cards: list = field(default_factory=list)
    message: Optional[str] = None
    metadata: MetadataBlock = field(default_factory=MetadataBlock)
    provenance: ProvenanceNode = field(default_factory=lambda: ProvenanceNode(""), compare=False)
    cumulative_transform: Transform3D = field(default_factory=Transform3D.identity, compare=False)
    source_path: str = field(default="", compare=False)
    trailing_text: str = field(default="", compare=False)
    tail_comments: dict = field(default_factory=dict, compare=False, repr=False)
    parse_warnings: list = field(default_factory=list, compare=False, repr=False)
    history: list = field(default_factory=list, compare=False, repr=False)

    # category views -----------------------------------------------------
    @property
    def transforms(self) -> list[TransformCard]:
        return [c for c in self.data_cards if isinstance(c, TransformCard)]

    @property
    def materials(self) -> list[MaterialCard]:
        return [c for c in self.data_cards if isinstance(c, MaterialCard)]

    @property
    def other_data_cards(self) -> list[OpaqueCard]:
        return [c for c in self.data_cards if isinstance(c, OpaqueCard)]

    def cell(self, cid: int) -> CellCard:
        for c in self.cells:
            if c.id == cid:
                return c
        raise KeyError(cid)

    def surface(self, sid: int) -> SurfaceCard:
        for s in self.surfaces:
            if s.id == sid:
                return s
        raise KeyError(sid)

    def transform(self, tid: int) -> TransformCard:
        for t in self.transforms:
            if t.id == tid:
                return t
        raise KeyError(tid)

    def material(self, mid: int) -> MaterialCard:
        for m in self.materials:
            if m.id == mid:
                return m
        raise KeyError(mid)

    def copy(self) -> "Deck":
        return copy.deepcopy(self)

    @property
    def gas_cell(self) -> CellCard:
        return self.cells[-2]

    @property
    def graveyard_cell(self) -> CellCard:
        return self.cells[-1]

    @property
    def name(self) -> str:
        return os.path.basename(self.provenance.source_path or self.source_path)

    # operations as methods; the deck is changed in place except by extract
    def renum(self, cell=None, surf=None, trans=None) -> "Deck":
        from .renumber import renumber
        return renumber(self, cell, surf, trans)

    def extract(self, cell_ids) -> "Deck":
        from .extract import extract
        return extract(self, cell_ids)

    def insert(self, guest: "Deck", location: str = "default") -> "Deck":
        from .assemble import insert
        return insert(self, guest, location)

    def insert_cells(self, guest: "Deck") -> "Deck":
        from .assemble import insert_cells
        return insert_cells(self, guest)

    def transform_by(self, t: Transform3D, description: str = None) -> "Deck":
        from .transform import transform_deck
        return transform_deck(self, t, description)

    def translate(self, shift) -> "Deck":
        from .transform import translate_deck
        return translate_deck(self, shift)

    def rotate(self, axis: str, angle: float, shift=(0, 0, 0)) -> "Deck":
        from .transform import rotate_deck
        return rotate_deck(self, axis, angle, shift)

    def rotate_u(self, u, angle: float, shift=(0, 0, 0)) -> "Deck":
        from .transform import rotate_deck_about
        return rotate_deck_about(self, u, angle, shift)

    def get_tr(self) -> Transform3D:
        return self.cumulative_transform

    def resolve_trcl(self, keep=()) -> "Deck":
        from .transform import resolve_trcl
        return resolve_trcl(self, keep)

    def get_group(self, name: str, key: str):
        from .metadata import get_group
        return get_group(self, name, key)

    def find_tr_card(self, tr_id: int) -> dict:
        from .metadata import find_tr_card
        return find_tr_card(self, tr_id)

    def add_card(self, lines) -> "Deck":
        from .metadata import add_card
        return add_card(self, lines)

    def write(self, destination=None) -> str:
        from .writer import write_deck
        return write_deck(self, destination)


def cell_transform_refs(cell: CellCard) -> list[int]:
    """tr-card numbers used by ``trcl``/``fill`` of a cell."""
    out = []
    if isinstance(cell.trcl, int):
        out.append(cell.trcl)
    if cell.fill is not None:
        out.extend(t for t in cell.fill.transforms() if isinstance(t, int))
    return out


def _dupes(ids):
    seen, dup = set(), []
    for i in ids:
        if i in seen and i not in dup:
            dup.append(i)
        seen.add(i)
    return dup


def validate_structure(deck: Deck) -> list[Diagnostic]:
    """Structural diagnostics; a deck is assemblable iff no ``error`` is reported."""
    diags: list[Diagnostic] = []

    def err(msg, loc=""):
        diags.append(Diagnostic("error", msg, loc))

    def warn(msg, loc=""):
        diags.append(Diagnostic("warning", msg, loc))

    for w in deck.parse_warnings:
        warn(str(w))

    cell_ids = [c.id for c in deck.cells]
    surf_ids = [s.id for s in deck.surfaces]
    tr_ids = [t.id for t in deck.transforms]
    mat_ids = [m.id for m in deck.materials]
    for label, ids in (("cell", cell_ids), ("surface", surf_ids), ("transform", tr_ids), ("material", mat_ids)):
        for d in _dupes(ids):
            err(f"duplicate {label} id {d}", f"{label} {d}")
    cset, sset, tset, mset = set(cell_ids), set(surf_ids), set(tr_ids), set(mat_ids)
    universes = {c.universe for c in deck.cells if c.universe}

    filled = set()
    for c in deck.cells:
        loc = f"cell {c.id}"
        for s in surfaces_in(c.geometry):
            if s not in sset:
                err(f"dangling surface reference {s}", loc)
        for n in cells_in(c.geometry):
            if n not in cset:
                err(f"dangling cell reference #{n}", loc)
        if c.material == 0 and c.density is not None:
            err("void cell must not carry a density", loc)
        if c.material != 0:
            if c.density is None:
                err("material cell needs a density", loc)
            if c.material not in mset:
                err(f"dangling material reference {c.material}", loc)
        for t in cell_transform_refs(c):
            if t not in tset:
                err(f"dangling transform reference {t}", loc)
        if c.fill is not None:
            for u in c.fill.universes():
                filled.add(u)
                if u not in universes:
                    err(f"dangling universe reference {u}", loc)
        for key, val in c.params.items():
            if key not in ("u", "lat", "trcl", "fill") and not isinstance(val, str):
                err(f"malformed parameter {key}", loc)
    for u in sorted(universes - filled):
        warn(f"universe {u} is never filled", f"u={u}")

    for s in deck.surfaces:
        loc = f"surface {s.id}"
        if s.transform is not None and s.transform not in tset:
            err(f"dangling transform reference {s.transform}", loc)
        if s.periodic is not None and s.periodic not in sset:
            err(f"dangling periodic surface {s.periodic}", loc)
        arity = SURFACE_ARITY.get(s.mnemonic)
        if arity is None:
            warn(f"unknown surface mnemonic {s.mnemonic!r} kept verbatim", loc)
        elif len(s.coefficients) not in arity:
            warn(f"{s.mnemonic} expects {'/'.join(map(str, arity))} coefficients, got {len(s.coefficients)}", loc)

    for card in deck.other_data_cards:
        base = card.name.split(":")[0].lstrip("*")
        if base in CELL_PARAM_CARDS:
            warn(f"cell parameter card {card.name!r} in data block depends on cell order; define it in the cell block", card.name)

    refs = {"cell": cset, "surf": sset, "trans": tset}
    for gname, group in deck.metadata.groups.items():
        if not isinstance(group, dict):
            err("metadata group must be a JSON object", gname)
            continue
        for key, known in refs.items():
            if key not in group:
                continue
            vals = group[key]
            if not isinstance(vals, list) or not all(isinstance(v, int) for v in vals):
                err(f"reserved key {key!r} must hold a list of integers", gname)
                continue
            for v in vals:
                if v not in known:
                    err(f"dangling metadata reference {key}={v}", gname)

    if len(deck.cells) < 2:
        err("deck needs a gas cell and a graveyard cell as its last two cells")
    else:
        gas, grave = deck.cells[-2], deck.cells[-1]
        if grave.material != 0:
            err("graveyard cell must be void", f"cell {grave.id}")
        if grave.universe or gas.universe:
            err("gas and graveyard cells must not belong to a universe", f"cell {grave.id}")
        if grave.fill is not None:
            err("graveyard cell must not be filled", f"cell {grave.id}")
        if any(isinstance(n, CellComplement) for n in walk(grave.geometry)):
            warn("graveyard geometry uses a cell complement; it cannot serve as a bounding surface", f"cell {grave.id}")
    return diags


def errors_of(diags) -> list[Diagnostic]:
    return [d for d in diags if d.severity == "error"]


def is_assemblable(deck: Deck) -> bool:
    return not errors_of(validate_structure(deck))


def require_assemblable(deck: Deck, role: str = "deck") -> None:
    errs = errors_of(validate_structure(deck))
    if errs:
        raise NotAssemblable(
            f"{role} is not assemblable: " + "; ".join(str(e) for e in errs)
            + " (the ambient-medium cell must be second-to-last and the void graveyard last)",
            errs,
        )


def bounding_expression(deck: Deck) -> Expr:
    """Geometry of the graveyard cell, i.e. the exterior of the object."""
    require_assemblable(deck)
    return deck.cells[-1].geometry
