import json
from pathlib import Path

import pytest

from shadowcut.model import parse_problem

ROOT = Path(__file__).resolve().parent.parent


@pytest.fixture(scope="session")
def toy_doc():
    return json.loads((ROOT / "instances" / "toy.json").read_text())


@pytest.fixture(scope="session")
def toy_model(toy_doc):
    return parse_problem(toy_doc)
