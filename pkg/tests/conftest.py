import json
import shutil
from pathlib import Path

import numpy as np
import pytest

from app.backend.utils.semantics import Model


@pytest.fixture(scope="session")
def test_dir():
    """Create and return the test directory path."""
    test_dir = Path("tests/test_data")
    test_dir.mkdir(exist_ok=True)
    return test_dir


@pytest.fixture(scope="session", autouse=True)
def cleanup_test_files(test_dir):
    """Clean up test files after all tests have run."""
    yield
    # Clean up test data files but keep the directory
    for item in test_dir.glob("*"):
        if item.is_file():
            item.unlink()
        elif item.is_dir():
            shutil.rmtree(item)


@pytest.fixture
def rng():
    """Seeded generator; every random test is reproducible."""
    return np.random.default_rng(0)


@pytest.fixture
def three_world_model():
    """
    Countermodel of (<>p -> []q) -> [](p -> q):
    x R x.m0, x.m0 <= x.m0.i0, p true at x.m0.i0 only.
    """
    worlds = ["x", "x.m0", "x.m0.i0"]
    le = [(w, w) for w in worlds] + [("x.m0", "x.m0.i0")]
    return Model.from_relations(worlds, le, [("x", "x.m0")], {"p": ["x.m0.i0"], "q": []})


@pytest.fixture
def model_file(test_dir, three_world_model):
    """The three-world model written in the JSON model format."""
    from app.backend.utils.semantics import model_to_json

    path = test_dir / "three_worlds.json"
    path.write_text(json.dumps(model_to_json(three_world_model)))
    return str(path)


