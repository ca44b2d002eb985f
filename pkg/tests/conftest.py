import os

import numpy as np
import pytest
from hypothesis import settings

SEED = int(os.environ.get("CONSENSUS_LAB_SEED", "20240601"))

settings.register_profile("default", deadline=None, max_examples=100, derandomize=True)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(SEED)
