import dataclasses

import numpy as np
import pytest

from spincoding.config.settings import get_settings


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def settings():
    return get_settings()


@pytest.fixture
def small_chunks(settings):
    """Settings that split even tiny sweeps into several chunks."""
    return dataclasses.replace(settings, sweep_chunk_size=7)


@pytest.fixture
def clean_settings():
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()
