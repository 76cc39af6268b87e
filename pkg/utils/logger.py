"""Logging configuration for the vacuum-QKD toolkit."""
import logging
import sys
from datetime import datetime
from pathlib import Path

from config import Config

# Loggers handed out by setup_logger, so the CLI can re-level them later.
_managed_loggers = {}


def setup_logger(name: str) -> logging.Logger:
    """Set up a logger with file and console handlers.

    The console handler writes to stderr; stdout carries CSV/JSON output.

    Args:
        name: Name of the logger (typically __name__)

    Returns:
        Configured logger instance
    """
    logger = logging.getLogger(name)
    logger.setLevel(logging.DEBUG)
    logger.propagate = False

    # Avoid duplicate handlers if this logger was already set up
    if name in _managed_loggers:
        return logger

    formatter = logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    )

    if Config.LOG_TO_FILE:
        # File handler - daily log files
        log_dir = Path(Config.LOG_DIR)
        log_dir.mkdir(parents=True, exist_ok=True)
        log_file = log_dir / f"vacuum_qkd_{datetime.now().strftime('%Y%m%d')}.log"
        file_handler = logging.FileHandler(log_file)
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(getattr(logging, Config.LOG_LEVEL))
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    _managed_loggers[name] = console_handler
    return logger


def set_log_level(level: str) -> None:
    """Change the console level of every logger created by setup_logger.

    Args:
        level: Standard level name, e.g. 'DEBUG' or 'WARNING'
    """
    level = level.upper()
    if not isinstance(getattr(logging, level, None), int):
        raise ValueError(f"Unknown log level: {level}")

    Config.LOG_LEVEL = level
    for handler in _managed_loggers.values():
        handler.setLevel(getattr(logging, level))
