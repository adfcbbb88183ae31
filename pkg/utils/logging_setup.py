"""
Colorized console logging for CLI runs.
"""

import logging
import os
from typing import Optional

import colorlog
from dotenv import load_dotenv

load_dotenv()

LOG_FORMAT = '%(log_color)s%(asctime)s %(levelname)-8s%(reset)s %(name)s: %(message)s'
LOG_COLORS = {
    'DEBUG': 'cyan',
    'INFO': 'green',
    'WARNING': 'yellow',
    'ERROR': 'red',
    'CRITICAL': 'bold_red',
}

_HANDLER_NAME = 'rom-toolkit-console'


def configure_logging(level: Optional[str] = None) -> logging.Logger:
    """
    Install a single colorized stream handler on the root logger.

    Calling this more than once only updates the level.

    Args:
        level: Level name; falls back to ROM_LOG_LEVEL, then INFO

    Returns:
        The root logger
    """
    if level is None:
        level = os.getenv('ROM_LOG_LEVEL', 'INFO')

    root = logging.getLogger()
    root.setLevel(level.upper())

    if not any(getattr(h, 'name', None) == _HANDLER_NAME for h in root.handlers):
        handler = colorlog.StreamHandler()
        handler.set_name(_HANDLER_NAME)
        handler.setFormatter(colorlog.ColoredFormatter(
            LOG_FORMAT,
            datefmt='%H:%M:%S',
            log_colors=LOG_COLORS,
        ))
        root.addHandler(handler)

    return root
