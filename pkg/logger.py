"""
Logging setup shared by the estimators, the benchmark harness and the CLI.

Log records go to stderr so that command output on stdout stays clean. When
LOG_FILE is set, a plain-text DEBUG log (with the worker thread name) is
appended there as well.
"""

import logging
import sys
import time
from contextlib import contextmanager
from typing import Iterator

from config import LOG_FILE, LOG_LEVEL

_configured = False

_RESET = "\033[0m"
_LEVEL_COLORS = {
    logging.DEBUG: "\033[36m",    # Cyan
    logging.INFO: "\033[32m",     # Green
    logging.WARNING: "\033[33m",  # Yellow
    logging.ERROR: "\033[31m",    # Red
    logging.CRITICAL: "\033[1;31m",  # Bold red
}

DATE_FMT = "%Y-%m-%d %H:%M:%S"
FILE_FMT = "%(asctime)s  %(threadName)-22s  %(name)-11s  %(levelname)-8s  %(message)s"


class ColoredConsoleFormatter(logging.Formatter):
    """Pads level names to a fixed column and colors them on a terminal."""

    BASE_FMT = "%(asctime)s  %(name)-11s  %(levelname)s  %(message)s"

    def __init__(self, use_color: bool = True) -> None:
        super().__init__(fmt=self.BASE_FMT, datefmt=DATE_FMT)
        self.use_color = use_color

    def format(self, record: logging.LogRecord) -> str:
        original = record.levelname
        record.levelname = f"{original:<8}"
        if self.use_color and record.levelno in _LEVEL_COLORS:
            record.levelname = f"{_LEVEL_COLORS[record.levelno]}{record.levelname}{_RESET}"
        try:
            return super().format(record)
        finally:
            record.levelname = original


def _configure_root_logger() -> None:
    global _configured
    if _configured:
        return

    level = getattr(logging, LOG_LEVEL, logging.INFO)
    root_logger = logging.getLogger()
    root_logger.setLevel(level)

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(level)
    console_handler.setFormatter(ColoredConsoleFormatter(use_color=sys.stderr.isatty()))
    root_logger.addHandler(console_handler)

    if LOG_FILE:
        file_handler = logging.FileHandler(LOG_FILE, mode="a", encoding="utf-8")
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(logging.Formatter(fmt=FILE_FMT, datefmt=DATE_FMT))
        root_logger.addHandler(file_handler)
        root_logger.setLevel(logging.DEBUG)

    _configured = True


def set_verbose() -> None:
    """Raise the root logger and every attached handler to DEBUG."""
    _configure_root_logger()
    logging.getLogger().setLevel(logging.DEBUG)
    for handler in logging.getLogger().handlers:
        handler.setLevel(logging.DEBUG)


@contextmanager
def timed(logger: logging.Logger, label: str) -> Iterator[dict[str, float]]:
    """
    Measure a block with the monotonic clock and log its duration at DEBUG.

    Yields a dict whose "ms" entry holds the elapsed milliseconds once the
    block exits.
    """
    result = {"ms": 0.0}
    start = time.perf_counter()
    try:
        yield result
    finally:
        result["ms"] = (time.perf_counter() - start) * 1000.0
        logger.debug("%s took %.3f ms", label, result["ms"])


def get_logger(component_name: str) -> logging.Logger:
    """
    Get a named logger for a specific component.

    Args:
        component_name: Name of the component (e.g., "Tree", "DMKDE", "Grid").

    Returns:
        A configured logging.Logger instance.
    """
    _configure_root_logger()
    return logging.getLogger(component_name)
