"""Shared fixtures for the cineloop test suite."""

import numpy as np
import pytest

from cineloop.core.pyramid import ImageRGB


@pytest.fixture(autouse=True)
def isolated_data_dir(tmp_path, monkeypatch):
    """Keep settings and logs out of the real user data directory."""
    monkeypatch.setenv('XDG_DATA_HOME', str(tmp_path / 'xdg'))
    for name in ('CINELOOP_THREADS', 'CINELOOP_FRAMES', 'CINELOOP_LEVELS', 'CINELOOP_LOG_LEVEL',
                 'CINELOOP_MEDIAN_KERNEL', 'CINELOOP_HOLE_EPSILON'):
        monkeypatch.delenv(name, raising=False)
    return tmp_path / 'xdg'


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def random_image(rng):
    def make(width=32, height=32):
        return ImageRGB(rng.random((height, width, 3)))
    return make
