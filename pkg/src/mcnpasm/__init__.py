"""Read, move, renumber, cut and assemble MCNP input decks."""
from .algebra import (
    EulerXZX,
    Transform3D,
    apply_to_point,
    arbitrary_axis_rotation,
    axis_rotation,
    compose_cell_transform,
    compose_surface_transform,
    degrees_to_cosines,
    euler_xzx,
    reverse_to_forward,
    to_tr_entries,
)
from .assemble import insert, insert_cells, materials_equal
from .errors import *  # noqa: F401,F403
from .extract import dependency_closure, extract
from .metadata import add_card, find_tr_card, get_group, merge_metadata
from .model import Deck, bounding_expression, is_assemblable, validate_structure
from .parser import parse_deck, read_deck
from .renumber import remap, renumber
from .transform import (
    get_cumulative_transform,
    resolve_trcl,
    rotate_deck,
    rotate_deck_about,
    transform_deck,
    translate_deck,
)
from .writer import build_header, write_deck

go = read_deck

__version__ = "0.1.0"
