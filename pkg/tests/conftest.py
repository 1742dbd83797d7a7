"""
Shared fixtures for the test suites.
"""
import os
import sys

import numpy as np
import pytest

# Add the repository root to the path so `src.` imports resolve
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from src.utils.config import RunConfig


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def config():
    return RunConfig()

