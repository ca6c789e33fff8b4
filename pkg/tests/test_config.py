import json
import logging

import pytest

from cineloop.core.config import Config, get_data_dir
from cineloop.core.logger import configure_logging, get_logger
from cineloop.core.settings import Settings


def test_data_dir_follows_xdg(isolated_data_dir):
    assert get_data_dir() == str(isolated_data_dir / 'cineloop')


def test_defaults():
    config = Config()
    assert config.get('FRAMES') == 48
    assert config.get('LEVELS') == 5
    assert config.get('FLOW_SIZE') == 512
    assert config.get('MASK_AREA_THRESHOLD') == 0.03
    assert config.get('MISSING', 'fallback') == 'fallback'


def test_settings_then_environment_override(monkeypatch):
    config = Config({'frames': 24, 'levels': 3})
    assert config.get('FRAMES') == 24
    monkeypatch.setenv('CINELOOP_FRAMES', '12')
    config = Config({'frames': 24, 'levels': 3})
    assert config.get('FRAMES') == 12
    assert config.get('LEVELS') == 3


def test_bad_environment_value(monkeypatch):
    monkeypatch.setenv('CINELOOP_LEVELS', 'many')
    with pytest.raises(ValueError, match="CINELOOP_LEVELS"):
        Config()


def test_threads(monkeypatch):
    assert Config().threads() >= 1
    assert Config({'threads': 3}).threads() == 3
    monkeypatch.setenv('CINELOOP_THREADS', '2')
    assert Config({'threads': 3}).threads() == 2
    monkeypatch.setenv('CINELOOP_THREADS', '0')
    with pytest.raises(ValueError):
        Config().threads()


def test_settings_file_created_and_updated(isolated_data_dir):
    settings = Settings()
    assert settings.settings_file == isolated_data_dir / 'cineloop' / 'settings.json'
    assert settings.get_settings()['frames'] == 48
    assert settings.update_settings({'frames': 16})
    assert json.loads(settings.settings_file.read_text())['frames'] == 16


def test_loggers_nest_under_package_root():
    logger = get_logger('tests')
    assert logger.name == 'cineloop.tests'
    root = configure_logging('ERROR')
    console = [h for h in root.handlers if getattr(h, '_cineloop_console', False)]
    assert console and console[0].level == logging.ERROR
    configure_logging('WARNING')


def test_hole_fill_keys_read_from_environment(monkeypatch):
    assert Config().get('MEDIAN_KERNEL') == 7
    assert Config().get('HOLE_EPSILON') == 1e-8
    monkeypatch.setenv('CINELOOP_MEDIAN_KERNEL', '5')
    monkeypatch.setenv('CINELOOP_HOLE_EPSILON', '1e-6')
    config = Config()
    assert config.get('MEDIAN_KERNEL') == 5
    assert config.get('HOLE_EPSILON') == 1e-6
