import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from corpus import loop_free_corpus


@pytest.fixture(scope="session")
def loop_free_500():
    """The shared corpus for the structural-property acceptance criteria."""
    return loop_free_corpus(500, seed=20120)
