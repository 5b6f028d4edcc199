import shutil
import warnings
from pathlib import Path

import numpy as np
import pytest

from mcnpasm import parse_deck, read_deck
from mcnpasm.plan import run_plan

ROOT = Path(__file__).resolve().parents[1]
FIXTURES = ROOT / "fixtures"
DECKS = ["room", "detector", "ccd", "lat_ex5", "trcl"]
ANGLES = [0, 30, 45, 90]


def fixture_path(name: str) -> Path:
    return FIXTURES / f"{name}.mcnp"


def load(name: str):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return read_deck(str(fixture_path(name)))


def deck_from(text: str):
    return parse_deck(text, "inline.mcnp")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def workflow_dir(tmp_path_factory):
    """Copy of the fixtures with both plans run; outputs in ``out/``."""
    work = tmp_path_factory.mktemp("workflow")
    for name in DECKS:
        shutil.copy(fixture_path(name), work)
    for plan in ("workflow.yaml", "reprocess.yaml"):
        shutil.copy(FIXTURES / plan, work)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        written = run_plan(str(work / "workflow.yaml"))
        written += run_plan(str(work / "reprocess.yaml"))
    return work, written
