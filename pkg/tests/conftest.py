import os
import sys
import pytest
import tempfile
from pathlib import Path
import numpy as np

from fractal_geom.models import GeneratorSpec, PointSet
from fractal_geom.pointgen import generate

# Subprocess tests run `python -m fractal_geom`; keep the source tree importable
# even when a test overrides HOME.
_real_pythonpath = os.pathsep.join([str(Path(__file__).resolve().parent.parent)] + sys.path)

@pytest.fixture(autouse=True)
def _preserve_pythonpath():
    old = os.environ.get("PYTHONPATH")
    os.environ["PYTHONPATH"] = _real_pythonpath
    yield
    if old is None:
        os.environ.pop("PYTHONPATH", None)
    else:
        os.environ["PYTHONPATH"] = old

@pytest.fixture(autouse=True)
def _isolate_settings(tmp_path, monkeypatch):
    """Keep user settings and the threads override out of every test."""
    monkeypatch.setenv("FRACTAL_GEOM_PROJECT_DIR", str(tmp_path / "project"))
    monkeypatch.setenv("HOME", str(tmp_path / "home"))
    monkeypatch.delenv("FRACTAL_GEOM_THREADS", raising=False)

@pytest.fixture
def temp_dir():
    """Create a temporary directory for test files."""
    with tempfile.TemporaryDirectory() as tmpdir:
        yield Path(tmpdir)

@pytest.fixture
def sample_settings():
    """Sample settings dictionary."""
    return {
        "fractalGeom": {
            "tol": 1e-9,
            "threads": 2,
            "seed": 7,
            "logLevel": "INFO",
        }
    }

@pytest.fixture
def carpet2():
    return generate(GeneratorSpec(kind="carpet", k=2))

@pytest.fixture
def square():
    return PointSet.from_array([[0, 0], [1, 0], [1, 1], [0, 1]], label="square")

@pytest.fixture
def random_points():
    """Seeded uniform points in the unit square: random_points(n, seed)."""
    def make(n: int, seed: int = 0, d: int = 2, scale: float = 1.0) -> PointSet:
        return generate(GeneratorSpec(kind="random", n=n, d=d, seed=seed, scale=scale))
    return make

@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(1234))
