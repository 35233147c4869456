import os
import tempfile
from pathlib import Path

import pytest

# Override environment for testing
os.environ["LOG_FILE"] = os.path.join(tempfile.gettempdir(), "ybe_test.log")
os.environ.setdefault("LOG_LEVEL", "INFO")

from ybe.services.brace import build_brace
from ybe.services.family import build, cyclic_params, vendramin_params
from ybe.services.permgroup import enumerate_group
from ybe.services.solution import FiniteSolution
from ybe.utils.logging import setup_logger

# Test logger
logger = setup_logger("tests")

DATA_DIR = Path(__file__).resolve().parents[2] / "data"

# an accepted solution whose right actions are not the inverted left ones
NON_LRI_TABLE = [[2, 3, 0, 1], [2, 3, 0, 1], [3, 2, 1, 0], [3, 2, 1, 0]]

# grid.txt blocks whose permutation group exceeds 20_000 elements
LARGE_GRID_POINTS = [7, 11, 13]


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture(scope="session")
def vendramin_params_fx():
    """X(Z/2, Z/2, {1,2}) with phi1 = phi2 = id."""
    return vendramin_params()


@pytest.fixture(scope="session")
def vendramin(vendramin_params_fx) -> FiniteSolution:
    return build(vendramin_params_fx)


@pytest.fixture(scope="session")
def z3_params():
    """A = B = Z/3, phi1 the indicator map, phi2 = id."""
    return cyclic_params(3)


@pytest.fixture(scope="session")
def z3(z3_params) -> FiniteSolution:
    return build(z3_params)


@pytest.fixture(scope="session")
def vendramin_group(vendramin):
    return enumerate_group(vendramin, cap=10_000)


@pytest.fixture(scope="session")
def z3_group(z3):
    return enumerate_group(z3, cap=100_000)


@pytest.fixture(scope="session")
def vendramin_brace(vendramin_group):
    return build_brace(vendramin_group)


@pytest.fixture(scope="session")
def non_lri() -> FiniteSolution:
    return FiniteSolution.from_table(NON_LRI_TABLE)


@pytest.fixture
def params_file(tmp_path):
    """Write a params text to a temp file and return its path."""

    def write(text: str, name: str = "params.txt") -> str:
        path = tmp_path / name
        path.write_text(text)
        return str(path)

    return write
