from pathlib import Path

import pytest

from crossmachine.data_io import parse_comparison

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA


@pytest.fixture(scope="session")
def table2():
    return parse_comparison((DATA / "table2_memetic_qap.csv").read_text())


@pytest.fixture(scope="session")
def table3():
    return parse_comparison((DATA / "table3_eda_qap.csv").read_text())
