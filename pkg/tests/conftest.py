import os
import sys

import hypothesis
import numpy as np
import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from core.network import FiringMatrix  # noqa: E402

hypothesis.settings.register_profile("fast", max_examples=25, deadline=None)
hypothesis.settings.register_profile("thorough", max_examples=300, deadline=None)
hypothesis.settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "fast"))


@pytest.fixture
def worked_matrix() -> FiringMatrix:
    """3×2 example: a_1 = (1,0,1), a_2 = (0,1,1)."""
    return FiringMatrix.from_columns([[1, 0, 1], [0, 1, 1]])


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)
