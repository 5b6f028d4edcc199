"""Run the tomography-bench plans on the shipped fixtures and summarize the outputs.

    python scripts/run_workflow.py

Writes fixtures/out/room_{0,30,45,90}.mcnp and fixtures/out/newroom_45.mcnp.
"""
import argparse
import warnings
from pathlib import Path

from mcnpasm import read_deck, validate_structure
from mcnpasm.geometry import CellComplement, walk
from mcnpasm.model import errors_of
from mcnpasm.plan import run_plan

FIXTURES = Path(__file__).resolve().parents[1] / "fixtures"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--quiet", action="store_true", help="hide deck warnings")
    args = ap.parse_args()
    with warnings.catch_warnings():
        if args.quiet:
            warnings.simplefilter("ignore")
        written = run_plan(str(FIXTURES / "workflow.yaml"))
        written += run_plan(str(FIXTURES / "reprocess.yaml"))
    for path in written:
        deck = read_deck(path)
        gas = deck.cells[-2]
        excl = sum(isinstance(n, CellComplement) for n in walk(gas.geometry))
        errs = errors_of(validate_structure(deck))
        print(f"{path}: {len(deck.cells)} cells, {len(deck.surfaces)} surfaces, "
              f"{len(deck.transforms)} tr cards, {len(deck.materials)} materials, "
              f"{excl} exclusions in gas cell, {len(errs)} errors")


if __name__ == "__main__":
    main()
