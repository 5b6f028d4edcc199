"""Command-line front end: ``mcnpasm <command> ...``.

Exit status: 0 on success, 1 when ``--strict`` is given and warnings were
raised, 2 on errors.
"""
from __future__ import annotations

import argparse
import sys
import warnings

import numpy as np

from .errors import McnpError
from .model import errors_of, validate_structure
from .oracle import membership_matrix, sample_points, top_level_cells
from .parser import read_deck, transform_from_entries
from .plan import parse_cell_spec, run_plan


class UsageError(Exception):
    pass


def _floats(text: str, n: int = None) -> list[float]:
    try:
        vals = [float(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise UsageError(f"not a list of numbers: {text!r}") from None
    if n is not None and len(vals) != n:
        raise UsageError(f"expected {n} numbers, got {len(vals)}: {text!r}")
    return vals


def _emit(deck, out):
    text = deck.write(out)
    if out is None:
        sys.stdout.write(text)


def cmd_info(args):
    deck = read_deck(args.file)
    diags = validate_structure(deck)
    errs = errors_of(diags)

    def span(ids):
        return f"{min(ids)}-{max(ids)}" if ids else "none"

    status = "assemblable" if not errs else "not assemblable"
    print(f"{len(deck.cells)} cells, {status}")
    print(f"cells: {len(deck.cells)} (ids {span([c.id for c in deck.cells])})")
    print(f"surfaces: {len(deck.surfaces)} (ids {span([s.id for s in deck.surfaces])})")
    print(f"transforms: {len(deck.transforms)} (ids {span([t.id for t in deck.transforms])})")
    print(f"materials: {len(deck.materials)} (ids {span([m.id for m in deck.materials])})")
    print(f"other data cards: {len(deck.other_data_cards)}")
    if deck.metadata.groups:
        print(f"metadata groups: {', '.join(deck.metadata.groups)}")
    paths = deck.provenance.paths()
    print(f"provenance: {len(paths)} file(s): {', '.join(p for p in paths if p)}")
    for d in diags:
        print(str(d), file=sys.stderr)
    return 0


def cmd_renum(args):
    for name in ("cell", "surf", "trans"):
        v = getattr(args, name)
        if v is not None and v < 1:
            raise UsageError(f"--{name} must be >= 1")
    deck = read_deck(args.file)
    deck.renum(args.cell, args.surf, args.trans)
    _emit(deck, args.output)
    return 0


def cmd_extract(args):
    try:
        cells = parse_cell_spec(args.cells)
    except ValueError as e:
        raise UsageError(str(e)) from None
    deck = read_deck(args.file)
    _emit(deck.extract(cells), args.output)
    return 0


def cmd_transform(args):
    deck = read_deck(args.file)
    rotations = [(ax, getattr(args, f"rotate_{ax.lower()}")) for ax in "XYZ"]
    rotations = [(ax, a) for ax, a in rotations if a is not None]
    chosen = len(rotations) + (args.rotate_u is not None) + (args.tr_card is not None)
    if chosen > 1:
        raise UsageError("give at most one of --rotate-x/-y/-z, --rotate-u, --tr-card")
    shift = _floats(args.translate, 3) if args.translate is not None else [0.0, 0.0, 0.0]
    if rotations:
        ax, angle = rotations[0]
        deck.rotate(ax, angle, shift)
    elif args.rotate_u is not None:
        vals = _floats(args.rotate_u, 4)
        deck.rotate_u(vals[:3], vals[3], shift)
    elif args.tr_card is not None:
        vals = _floats(args.tr_card)
        if len(vals) not in (3, 12, 13):
            raise UsageError(f"--tr-card takes 3, 12 or 13 entries, got {len(vals)}")
        if args.translate is not None:
            raise UsageError("--translate cannot be combined with --tr-card")
        t, _, _ = transform_from_entries(vals)
        deck.transform_by(t)
    elif args.translate is not None:
        deck.translate(shift)
    _emit(deck, args.output)
    return 0


def cmd_insert(args):
    host = read_deck(args.host)
    guest = read_deck(args.guest)
    if args.cells_mode:
        host.insert_cells(guest)
    else:
        host.insert(guest, args.location)
    _emit(host, args.output)
    return 0


def cmd_resolve_trcl(args):
    deck = read_deck(args.file)
    keep = parse_cell_spec(args.keep) if args.keep else ()
    deck.resolve_trcl(keep)
    _emit(deck, args.output)
    return 0


def cmd_plan(args):
    for path in run_plan(args.planfile, output_dir=args.output_dir):
        print(path)
    return 0


def cmd_verify(args):
    """Sample points and report any that sit in no cell or in several top-level cells."""
    deck = read_deck(args.file)
    lo = _floats(args.box, 6)[0::2]
    hi = _floats(args.box, 6)[1::2]
    rng = np.random.default_rng(args.seed)
    ids = top_level_cells(deck)
    pts = sample_points(rng, lo, hi, args.points)
    m, amb = membership_matrix(deck, ids, pts)
    m = m[~amb]
    counts = m.sum(axis=1)
    holes = int((counts == 0).sum())
    overlaps = int((counts > 1).sum())
    print(f"{len(m)} points checked ({int(amb.sum())} on surfaces skipped): "
          f"{holes} in no cell, {overlaps} in several cells")
    return 0 if holes == 0 and overlaps == 0 else 2


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mcnpasm", description="Manipulate and assemble MCNP input files.")
    p.add_argument("--strict", action="store_true", help="exit with status 1 when warnings occur")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("info", help="summarize a deck")
    s.add_argument("file")
    s.set_defaults(func=cmd_info)

    s = sub.add_parser("renum", help="renumber cells, surfaces and tr cards")
    s.add_argument("file")
    s.add_argument("--cell", type=int)
    s.add_argument("--surf", type=int)
    s.add_argument("--trans", type=int)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_renum)

    s = sub.add_parser("extract", help="extract cells into a new deck")
    s.add_argument("file")
    s.add_argument("--cells", required=True, help="e.g. 12-21 or 1,3,5-7")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_extract)

    s = sub.add_parser("transform", help="move a whole deck")
    s.add_argument("file")
    s.add_argument("--translate", metavar="X,Y,Z")
    s.add_argument("--rotate-x", type=float, metavar="DEG")
    s.add_argument("--rotate-y", type=float, metavar="DEG")
    s.add_argument("--rotate-z", type=float, metavar="DEG")
    s.add_argument("--rotate-u", metavar="UX,UY,UZ,DEG")
    s.add_argument("--tr-card", metavar="ENTRIES", help="tr-card entries (3, 12 or 13 numbers)")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_transform)

    s = sub.add_parser("insert", help="insert GUEST into HOST")
    s.add_argument("host")
    s.add_argument("guest")
    s.add_argument("--location", choices=("default", "inside", "outside"), default="default")
    s.add_argument("--cells-mode", action="store_true", help="insert by excluding guest cells")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_insert)

    s = sub.add_parser("resolve-trcl", help="move surfaces of trcl cells below 1000")
    s.add_argument("file")
    s.add_argument("--keep", help="surface ids that must keep their number")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_resolve_trcl)

    s = sub.add_parser("plan", help="run a YAML assembly plan")
    s.add_argument("planfile")
    s.add_argument("--output-dir")
    s.set_defaults(func=cmd_plan)

    s = sub.add_parser("verify", help="sample points and check the cells partition space")
    s.add_argument("file")
    s.add_argument("--box", default="-1000,1000,-1000,1000,-1000,1000", metavar="X0,X1,Y0,Y1,Z0,Z1")
    s.add_argument("--points", type=int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            code = args.func(args)
        except UsageError as e:
            print(f"usage error: {e}", file=sys.stderr)
            return 2
        except (McnpError, OSError, KeyError, ValueError) as e:
            print(f"error: {e}", file=sys.stderr)
            return 2
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    if code == 0 and args.strict and caught:
        return 1
    return code


if __name__ == "__main__":
    sys.exit(main())
