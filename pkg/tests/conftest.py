import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from circgeom.config import load_frozen_constants


@pytest.fixture(scope="session")
def frozen():
    """Calibrated bound constants; tests must not run against an unfrozen table."""
    return load_frozen_constants()


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
