"""
Logging Utility
================

Every module gets its logger from `setup_logger(__name__)` instead of
calling `print()`. Solvers run thousands of time steps, so the rule of
thumb in this package is: one DEBUG line per solve, one INFO line per
run-level event, never a log call inside a Newton loop.

LEARNING POINT: Log Levels for Numerical Code
-----------------------------------------------
  - DEBUG:   per-solve diagnostics (Newton iterations, residuals)
  - INFO:    run-level progress (mode started, file written, optimizer summary)
  - WARNING: something recoverable (CG fell back to a direct solve)
  - ERROR:   a run failed and a partial manifest was written

The default level is INFO. Set GLIORAD_LOG_LEVEL=DEBUG to see solver detail.

EXAMPLE:
    from gliorad.utils.logger import setup_logger

    logger = setup_logger(__name__)
    logger.info("Forward solve finished")
"""

import logging
import os
import sys
from pathlib import Path


LOG_FORMAT = "%(asctime)s | %(levelname)-8s | %(name)-25s | %(message)s"
DATE_FORMAT = "%H:%M:%S"
LEVEL_ENV_VAR = "GLIORAD_LOG_LEVEL"


def default_level() -> int:
    """Resolve the default level from GLIORAD_LOG_LEVEL (falls back to INFO)."""
    name = os.environ.get(LEVEL_ENV_VAR, "INFO").upper()
    level = logging.getLevelName(name)
    return level if isinstance(level, int) else logging.INFO


def setup_logger(
    name: str,
    level: int | None = None,
    log_file: str | Path | None = None,
) -> logging.Logger:
    """
    Create and configure a logger instance.

    Args:
        name: Logger name (typically __name__ of the calling module)
        level: Minimum log level to capture (defaults to GLIORAD_LOG_LEVEL / INFO)
        log_file: Optional file path to also write logs to

    Returns:
        A configured Logger instance
    """
    logger = logging.getLogger(name)
    level = default_level() if level is None else level

    # Avoid adding duplicate handlers if called multiple times
    if logger.handlers:
        return logger

    logger.setLevel(level)

    console_handler = logging.StreamHandler(sys.stdout)
    console_handler.setLevel(level)
    console_handler.setFormatter(ColorFormatter(LOG_FORMAT, DATE_FORMAT))
    logger.addHandler(console_handler)

    if log_file:
        attach_file_handler(logger, log_file, level)

    return logger


def attach_file_handler(
    logger: logging.Logger,
    log_file: str | Path,
    level: int | None = None,
) -> logging.FileHandler:
    """
    Add a plain-text file handler to an existing logger.

    The runner uses this to capture `run.log` inside each output directory.
    Returns the handler so the caller can detach and close it afterwards.
    """
    log_path = Path(log_file)
    log_path.parent.mkdir(parents=True, exist_ok=True)
    handler = logging.FileHandler(log_path, encoding="utf-8")
    handler.setLevel(default_level() if level is None else level)
    handler.setFormatter(logging.Formatter(LOG_FORMAT, DATE_FORMAT))
    logger.addHandler(handler)
    return handler


class ColorFormatter(logging.Formatter):
    """
    Formatter that colors the level name on terminal output.

    Colors are only added to console output, never to file output.
    """

    COLORS = {
        logging.DEBUG:    "\033[36m",    # Cyan
        logging.INFO:     "\033[32m",    # Green
        logging.WARNING:  "\033[33m",    # Yellow
        logging.ERROR:    "\033[31m",    # Red
        logging.CRITICAL: "\033[1;31m",  # Bold Red
    }
    RESET = "\033[0m"

    def format(self, record: logging.LogRecord) -> str:
        # Copy so the file handler sees the uncolored level name
        record = logging.makeLogRecord(record.__dict__)
        color = self.COLORS.get(record.levelno, self.RESET)
        record.levelname = f"{color}{record.levelname}{self.RESET}"
        return super().format(record)
