import numpy as np
import pytest

import paramix as pm


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def reference():
    return pm.reference_device()
