"""Configuration loader for cineloop."""

import os
from pathlib import Path
from typing import Any, Dict, Optional

import psutil
from dotenv import load_dotenv

from .logger import get_logger

logger = get_logger('config')

ENV_PREFIX = 'CINELOOP_'

DEFAULTS: Dict[str, Any] = {
    'FRAMES': 48,
    'LEVELS': 5,
    'FLOW_SIZE': 512,
    'MASK_AREA_THRESHOLD': 0.03,
    'LARGE_HOLE_RATIO': 0.03,
    'MEDIAN_KERNEL': 7,
    'HOLE_EPSILON': 1e-8,
    'GIF_FRAME_MS': 42,
    'LOG_LEVEL': 'WARNING',
}

# settings.json keys that override DEFAULTS
SETTINGS_KEYS = {
    'frames': 'FRAMES',
    'levels': 'LEVELS',
    'flow_size': 'FLOW_SIZE',
    'log_level': 'LOG_LEVEL',
}


def get_data_dir() -> str:
    """Get the data directory path."""
    xdg_data_home = os.environ.get('XDG_DATA_HOME')
    if xdg_data_home:
        base_dir = Path(xdg_data_home)
    else:
        base_dir = Path.home() / '.local' / 'share'

    data_dir = base_dir / 'cineloop'
    data_dir.mkdir(parents=True, exist_ok=True)
    return str(data_dir)


def _coerce(value: str, like: Any) -> Any:
    if isinstance(like, bool):
        return value.lower() in ('1', 'true', 'yes')
    if isinstance(like, int):
        return int(value)
    if isinstance(like, float):
        return float(value)
    return value


class Config:
    """Configuration manager: defaults, then settings file, then environment."""

    def __init__(self, settings: Optional[Dict[str, Any]] = None):
        """Initialize Config.

        Args:
            settings: Values read from the settings file, if any
        """
        load_dotenv()
        self.data_dir = get_data_dir()
        self._settings = dict(settings or {})
        self._config = dict(DEFAULTS)

        for key, config_key in SETTINGS_KEYS.items():
            if self._settings.get(key) is not None:
                self._config[config_key] = self._settings[key]

        for key, default in DEFAULTS.items():
            raw = os.environ.get(ENV_PREFIX + key)
            if raw is None:
                continue
            try:
                self._config[key] = _coerce(raw, default)
            except ValueError:
                raise ValueError(f"{ENV_PREFIX}{key} must be a {type(default).__name__}, got {raw!r}")

    def get_data_dir(self) -> str:
        """Get the data directory path."""
        return self.data_dir

    def get(self, key: str, default: Any = None) -> Any:
        """Get configuration value.

        Args:
            key: Configuration key
            default: Default value if key not found

        Returns:
            Configuration value or default
        """
        return self._config.get(key, default)

    def get_all(self) -> Dict[str, Any]:
        """Get all configuration values."""
        return self._config.copy()

    def threads(self) -> int:
        """Worker thread count for frame rendering."""
        raw = os.environ.get(ENV_PREFIX + 'THREADS')
        if raw is not None:
            try:
                count = int(raw)
            except ValueError:
                raise ValueError(f"{ENV_PREFIX}THREADS must be an integer, got {raw!r}")
            if count < 1:
                raise ValueError(f"{ENV_PREFIX}THREADS must be >= 1, got {count}")
            return count

        if self._settings.get('threads'):
            return max(1, int(self._settings['threads']))

        count = psutil.cpu_count(logical=False) or psutil.cpu_count() or 1
        logger.debug(f"Using {count} worker threads")
        return count
