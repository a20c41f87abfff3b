"""
Logging configuration for command-line runs.
"""

import logging
from typing import Optional

from .config import Config

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def configure_logging(level: Optional[str] = None) -> logging.Logger:
    """Install one stderr handler on the package logger."""
    logger = logging.getLogger("src")
    logger.setLevel((level or Config.LOG_LEVEL).upper())
    if not logger.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        logger.addHandler(handler)
    return logger
