"""
Pytest configuration and fixtures for lane tests.
"""

from collections.abc import Iterator
from pathlib import Path

import pytest

from lane.runtime.device import ParallelHost, SerialHost

# Shipped dataset fixtures
DATA_PATH = Path(__file__).parent.parent / "data"


@pytest.fixture
def data_path() -> Path:
    """Return path to the shipped data directory."""
    return DATA_PATH


@pytest.fixture
def iris_file(data_path: Path) -> Path:
    """Return path to the normalised Iris dataset (150 rows, 4 features, 3 classes)."""
    return data_path / "iris_data_normalised.txt"


@pytest.fixture
def serial() -> Iterator[SerialHost]:
    """Serial-host device without a transfer link."""
    with SerialHost() as device:
        yield device


@pytest.fixture(params=[2, 4, 8], ids=lambda n: f"{n}w")
def parallel(request: pytest.FixtureRequest) -> Iterator[ParallelHost]:
    """Parallel-host device without a transfer link, 2, 4 and 8 workers."""
    with ParallelHost(request.param) as device:
        yield device
