import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ternroute.rrg import generate_grid
from ternroute.search import warmup_kernel


@pytest.fixture(scope="session", autouse=True)
def _warm_kernel():
    # Pay the JIT compile once per session, before anything is timed.
    warmup_kernel()


@pytest.fixture(scope="session")
def grid8():
    """Uncongested 8x8 graph shared by read-only tests."""
    return generate_grid(8, 8, {1: 4, 4: 2}, 1.0, 7)


@pytest.fixture()
def grid8_fresh():
    return generate_grid(8, 8, {1: 4, 4: 2}, 1.0, 7)
