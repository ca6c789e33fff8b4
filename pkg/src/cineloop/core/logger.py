"""
Logging configuration for cineloop.
"""

import logging
import os
from logging.handlers import RotatingFileHandler
from pathlib import Path
import platform
import sys
import traceback
from typing import Optional

ROOT_LOGGER = 'cineloop'

_configured = False


def get_log_dir() -> str:
    """Get the log directory path."""
    system = platform.system()

    if system == 'Darwin':  # macOS
        log_dir = str(Path.home() / 'Library' / 'Logs' / 'cineloop')
    else:
        xdg_data_home = os.environ.get('XDG_DATA_HOME')
        if xdg_data_home:
            log_dir = Path(xdg_data_home)
        else:
            log_dir = Path.home() / '.local' / 'share'
        log_dir = str(log_dir / 'cineloop' / 'logs')

    os.makedirs(log_dir, exist_ok=True)
    return log_dir


def _resolve_level(log_level: Optional[str]) -> int:
    name = log_level or os.environ.get('CINELOOP_LOG_LEVEL') or 'WARNING'
    level = getattr(logging, name.upper(), None)
    if not isinstance(level, int):
        raise ValueError(f"Unknown log level: {name}")
    return level


def configure_logging(log_level: Optional[str] = None) -> logging.Logger:
    """
    Configure the package root logger.

    File handlers are installed once per process; calling again only
    changes the console level.

    Args:
        log_level: Console log level (defaults to CINELOOP_LOG_LEVEL or WARNING)

    Returns:
        The configured root logger
    """
    global _configured

    logger = logging.getLogger(ROOT_LOGGER)
    level = _resolve_level(log_level)
    logger.setLevel(min(level, logging.INFO))
    logger.propagate = False

    if _configured:
        for handler in logger.handlers:
            if getattr(handler, '_cineloop_console', False):
                handler.setLevel(level)
        return logger

    formatter = logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    )
    logger.handlers = []

    try:
        log_dir = get_log_dir()
        test_file = os.path.join(log_dir, '.test_write')
        with open(test_file, 'w') as f:
            f.write('test')
        os.remove(test_file)
    except OSError as e:
        print(f"Warning: log directory is not writable, file logging disabled: {e}")
        log_dir = None

    if log_dir is not None:
        # General log file handler (INFO and above)
        file_handler = RotatingFileHandler(
            os.path.join(log_dir, 'cineloop.log'),
            maxBytes=1024 * 1024,  # 1MB
            backupCount=5
        )
        file_handler.setFormatter(formatter)
        file_handler.setLevel(logging.INFO)
        logger.addHandler(file_handler)

        # Error log file handler (ERROR and above only)
        error_handler = RotatingFileHandler(
            os.path.join(log_dir, 'cineloop.error.log'),
            maxBytes=1024 * 1024,  # 1MB
            backupCount=5
        )
        error_handler.setFormatter(formatter)
        error_handler.setLevel(logging.ERROR)
        logger.addHandler(error_handler)

    console_handler = logging.StreamHandler(sys.stdout)
    console_handler.setFormatter(formatter)
    console_handler.setLevel(level)
    console_handler._cineloop_console = True
    logger.addHandler(console_handler)

    _configured = True
    return logger


def install_excepthook(logger: logging.Logger) -> None:
    """Log uncaught exceptions before the interpreter exits."""

    def handle_exception(exc_type, exc_value, exc_traceback):
        if issubclass(exc_type, KeyboardInterrupt):
            sys.__excepthook__(exc_type, exc_value, exc_traceback)
            return

        error_msg = "".join(traceback.format_exception(exc_type, exc_value, exc_traceback))
        logger.error(f"Uncaught exception:\n{error_msg}")

    sys.excepthook = handle_exception


def get_logger(name: str, log_level: Optional[str] = None) -> logging.Logger:
    """
    Get a configured logger instance.

    Args:
        name: Logger name, nested under the package root logger
        log_level: Optional console level override

    Returns:
        A logger that propagates to the configured package root
    """
    root = configure_logging(log_level) if (log_level or not _configured) else logging.getLogger(ROOT_LOGGER)
    if name == ROOT_LOGGER or name.startswith(ROOT_LOGGER + '.'):
        return logging.getLogger(name)
    return root.getChild(name)
