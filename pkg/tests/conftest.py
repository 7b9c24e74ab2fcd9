import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from helpers import octahedron_body  # noqa: E402

from ftbp.qtensors import compute_q_tensors  # noqa: E402


@pytest.fixture(scope="session")
def body_small():
    """The smaller benchmark octahedron (extents 1, 1/e, 1/pi)."""
    return octahedron_body(1.0, 1.0 / np.e, 1.0 / np.pi)


@pytest.fixture(scope="session")
def body_big():
    """The larger benchmark octahedron (extents 1, 1.5, 0.9)."""
    return octahedron_body(1.0, 1.5, 0.9)


@pytest.fixture(scope="session")
def q5():
    return compute_q_tensors(5)
