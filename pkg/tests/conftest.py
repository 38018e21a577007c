import json
from pathlib import Path

import pytest

ORACLES = json.loads((Path(__file__).parent / "oracles" / "frozen.json").read_text())


@pytest.fixture(scope="session")
def oracle():
    return ORACLES

import sys

# the oracle helpers are plain functions that do not import mbvol
sys.path.insert(0, str(Path(__file__).parent / "oracles"))
