import os
import logging

from .logging_utils import ColorizingFormatter, MultiplexingHandler
from . import exceptions

__version__ = "0.1.0"

LOG_LEVEL_ENV = "DECILEDIFF_LOG_LEVEL"


def _level(name: str) -> int:
    return getattr(logging, str(name).upper(), logging.INFO)


def init_logger(name="DECILEDIFF", fmt="{asctime}: {message}", datefmt="%Y-%m-%d %H:%M:%S", loglevel="INFO"):
    """Returns the global decilediff logger (initializing if not already done so, with the given values).

    The level is taken from $DECILEDIFF_LOG_LEVEL when set, otherwise from loglevel.
    """
    global log
    if log is None:
        log = logging.getLogger(name)
        log.propagate = False
        log.setLevel(_level(os.environ.get(LOG_LEVEL_ENV) or loglevel))

        handler = MultiplexingHandler()
        handler.setFormatter(ColorizingFormatter(fmt, datefmt, style="{"))
        handler.setLevel(logging.DEBUG)
        log.addHandler(handler)

        exceptions.set_logger(log)
    return log


def set_logger(logger):
    global log
    log = logger
    exceptions.set_logger(logger)


def logger():
    return init_logger()


def set_log_level(level: str):
    """Sets the level of the global logger, e.g. from a command-line option"""
    init_logger().setLevel(_level(level))


log = None
init_logger()
