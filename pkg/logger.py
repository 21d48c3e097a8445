import logging

import colorlog

from settings import get_settings

_FORMAT = "%(log_color)s%(levelname)-8s%(reset)s %(name)s: %(message)s"
_configured = False


def _configure_root():
    global _configured
    if _configured:
        return
    handler = colorlog.StreamHandler()
    handler.setFormatter(colorlog.ColoredFormatter(_FORMAT))
    root = logging.getLogger("ty")
    root.addHandler(handler)
    root.setLevel(get_settings().log_level.upper())
    root.propagate = False
    _configured = True


def get_logger(name):
    """Logger under the package namespace; everything goes to stderr."""
    _configure_root()
    return logging.getLogger(f"ty.{name}")


def set_level(level):
    _configure_root()
    logging.getLogger("ty").setLevel(level.upper() if isinstance(level, str) else level)
