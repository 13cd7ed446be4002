import numpy as np
import pytest

from ffnn import NetworkSpec


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def tiny_spec() -> NetworkSpec:
    return NetworkSpec((2, 3, 2))


@pytest.fixture
def deep_spec() -> NetworkSpec:
    return NetworkSpec((2, 4, 4, 2), all_shortcuts=True)


@pytest.fixture
def tmp_out(tmp_path, monkeypatch):
    """Run output goes to a temporary directory."""
    monkeypatch.setenv("TSDL_OUTPUT_DIR", str(tmp_path))
    return tmp_path
