import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from thzchan.raytrace import RoomScene  # noqa: E402

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture
def rng():
    return np.random.default_rng(20240201)


@pytest.fixture
def scene():
    """Meeting-room scene with the Tx in a corner like a wall-mounted AP."""
    return RoomScene(10.15, 7.9, (1.0, 1.0), (5.3, 4.2))


@pytest.fixture
def characteristics_fixture_path():
    return DATA_DIR / "meeting_room_characteristics.csv"
