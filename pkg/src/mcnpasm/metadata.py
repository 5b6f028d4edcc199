"""JSON metadata after the data block, and raw card injection."""
from __future__ import annotations

import copy
import os
import re
import warnings

from .errors import DeckWarning, UnknownGroup, UnknownKey, UnknownTransform
from .model import Deck, MetadataBlock, OpaqueCard

# data-card names MCNP knows; anything else on the first line becomes a comment
_DATA_CARD = re.compile(
    r"^\*?(f|fc|e|t|c|fq|fm|de|df|em|tm|cm|cf|sf|fs|sd|fu|tf|dd|dxt|ft|fmesh|tmesh|"
    r"sdef|si|sp|sb|ds|sc|ssw|ssr|kcode|ksrc|nps|ctme|mode|phys|cut|prdmp|print|"
    r"dbcn|lost|rand|imp|vol|area|pwt|ext|vect|fcl|wwe|wwn|wwp|wwg|wwge|mesh|"
    r"esplt|tsplt|pd|dxc|bbrem|tmp|thtme|mt|mx|mpn|m|drxs|totnu|nonu|awtab|xs|void|"
    r"pikmt|mgopt|lca|lcb|lcc|lea|leb|fmult|tropt|unc|cosyp|cosy|bfld|bflcl|tr|"
    r"embed|embee|embeb|embem|embtb|embtm|notrn|spdtl|histp|ptrac|mplot|act|"
    r"kopts|hsrc|burn|idum|rdum|files|stop|psc|zz)\d*(:[a-z,/#]+)?$",
    re.IGNORECASE,
)


def get_group(deck: Deck, name: str, key: str):
    groups = deck.metadata.groups
    if name not in groups:
        raise UnknownGroup(name)
    if key not in groups[name]:
        raise UnknownKey(f"{name}.{key}")
    return groups[name][key]


def find_tr_card(deck: Deck, tr_id: int) -> dict:
    """Vector and row-major matrix of tr card ``tr_id``.

    A position ``P_old`` written in the card's frame lands at
    ``M^t P_old + T`` in the deck frame.
    """
    try:
        card = deck.transform(tr_id)
    except KeyError:
        raise UnknownTransform(tr_id) from None
    t = card.transform
    return {"translat": [float(x) for x in t.translation],
            "rot": [float(x) for x in t.rotation.ravel()]}


def add_card(deck: Deck, lines) -> Deck:
    """Append raw card lines to the data block (in place)."""
    if isinstance(lines, str):
        lines = [lines]
    lines = list(lines)
    if not lines:
        raise ValueError("no card text given")
    if any(not ln.strip() for ln in lines):
        raise ValueError("card lines must not be empty (a blank line ends the data block)")
    first = lines[0].split()[0]
    if not _DATA_CARD.match(first) and not re.match(r"^ {0,4}c( |$)", lines[0], re.IGNORECASE):
        lines[0] = "c " + lines[0]
    comments = []
    while lines and re.match(r"^ {0,4}c( |$)", lines[0], re.IGNORECASE):
        comments.append(lines.pop(0))
    if not lines:
        deck.tail_comments.setdefault("data", []).extend(comments)
        return deck
    text = " ".join(ln.split("$")[0].strip().rstrip("&") for ln in lines).lower()
    deck.data_cards.append(OpaqueCard(text.split()[0], text, lines, comments))
    return deck


def merge_metadata(host: MetadataBlock, guest: MetadataBlock, guest_name: str = "guest") -> MetadataBlock:
    """Union of both blocks; a guest group whose name is taken is renamed.

    Guest reserved keys are expected to be remapped already.
    """
    out = MetadataBlock(copy.deepcopy(host.groups))
    for name, group in guest.groups.items():
        new = name
        if new in out.groups:
            new = f"{name}@{os.path.basename(guest_name)}"
            k = 2
            while new in out.groups:
                new = f"{name}@{os.path.basename(guest_name)}#{k}"
                k += 1
            warnings.warn(f"metadata group {name!r} already exists; guest group renamed {new!r}",
                          DeckWarning, stacklevel=2)
        out.groups[new] = copy.deepcopy(group)
    return out
