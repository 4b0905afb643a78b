import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent.parent / 'src'))

from core.randomness import RandomStream  # noqa: E402


@pytest.fixture
def rng():
    return RandomStream(12345)


@pytest.fixture
def make_rng():
    return RandomStream
