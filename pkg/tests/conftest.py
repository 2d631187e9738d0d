"""Shared fixtures: the worked three-dimensional instance and seeded randomness."""

import json
import random
import sys
from pathlib import Path
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

import pytest

from pseudoellipse.model import ProblemInstance
from pseudoellipse.serialize import map_from_json

FIXTURES = Path(__file__).parent.parent / "fixtures"


@pytest.fixture
def p246_instance():
    """p = (2, 4, 6) into q = (1, 1, 1, 2, 2): n = 3, N = 5, s = 3."""
    return ProblemInstance.of([2, 4, 6], [1, 1, 1, 2, 2])


@pytest.fixture
def rng():
    return random.Random(20240517)


@pytest.fixture
def fixtures_dir():
    return FIXTURES


@pytest.fixture
def load_fixture():
    def _load(name):
        return json.loads((FIXTURES / name).read_text())
    return _load


@pytest.fixture
def load_map(load_fixture):
    def _load(name):
        return map_from_json(load_fixture(name))
    return _load
