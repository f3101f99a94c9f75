from __future__ import annotations

import numpy as np
import pytest

from powerlim.config import CliSettings, _environment_settings, set_settings


@pytest.fixture(autouse=True)
def default_settings():
    """Every test runs against the built-in defaults, whatever the environment says."""
    set_settings(CliSettings())
    yield
    set_settings(None)
    _environment_settings.cache_clear()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240607)
