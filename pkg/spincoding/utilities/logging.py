from __future__ import annotations

import logging
import sys
from logging.handlers import RotatingFileHandler

from ..config.settings import get_settings

LOGGER_NAME = "spincoding"


def setup_logging() -> logging.Logger:
    """Configure the package logger once; later calls return it unchanged."""
    settings = get_settings()
    logger = logging.getLogger(LOGGER_NAME)
    if logger.handlers:
        return logger

    level = getattr(logging, settings.log_level.upper(), logging.INFO)
    logger.setLevel(level)
    formatter = logging.Formatter("%(asctime)s - %(name)s - %(levelname)s - %(message)s")

    # stdout carries reports and CSV
    handlers: list[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if settings.log_file:
        handlers.append(RotatingFileHandler(settings.log_file, maxBytes=10_485_760, backupCount=5))
    for handler in handlers:
        handler.setLevel(level)
        handler.setFormatter(formatter)
        logger.addHandler(handler)

    logger.propagate = False
    return logger
