import os
import pathlib
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from oracles import DIAG, DISK, LINEAR, SQRT, family  # noqa: E402

FAMILY_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "families")


@pytest.fixture
def linear():
    return family(LINEAR, 1)


@pytest.fixture
def disk():
    return family(DISK, 2)


@pytest.fixture
def sqrt_family():
    return family(SQRT, 1)


@pytest.fixture
def diag():
    return family(DIAG, 2)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def family_dir():
    return pathlib.Path(FAMILY_DIR)
