import logging
import os
import sys
import tempfile
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Optional

DEFAULT_LOG_FILE = Path(tempfile.gettempdir()) / "ybe" / "ybe.log"

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - [%(filename)s:%(lineno)d] - %(funcName)s() - %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"
MAX_LOG_BYTES = 10 * 1024 * 1024


def _formatter() -> logging.Formatter:
    return logging.Formatter(LOG_FORMAT, DATE_FORMAT)


def setup_logger(
    name: str,
    level: Optional[str] = None,
    log_file: Optional[str] = None,
    console: bool = True,
) -> logging.Logger:
    """
    Return the named logger, attaching handlers on first use.

    Args:
        name: Logger name, normally the module's __name__
        level: Level name; falls back to LOG_LEVEL, then INFO
        log_file: Rotating log file; falls back to LOG_FILE, then a temp path
        console: Also echo warnings and errors to stderr

    Returns:
        The configured logger. Reports own stdout, so nothing is logged there.
    """
    logger = logging.getLogger(name)
    if logger.handlers:
        return logger

    logger.setLevel((level or os.getenv("LOG_LEVEL", "INFO")).upper())
    logger.propagate = False

    path = Path(log_file or os.getenv("LOG_FILE") or DEFAULT_LOG_FILE)
    path.parent.mkdir(parents=True, exist_ok=True)
    file_handler = RotatingFileHandler(path, maxBytes=MAX_LOG_BYTES, backupCount=5)
    file_handler.setFormatter(_formatter())
    logger.addHandler(file_handler)

    if console:
        stderr_handler = logging.StreamHandler(sys.stderr)
        stderr_handler.setFormatter(_formatter())
        stderr_handler.setLevel(logging.WARNING)
        logger.addHandler(stderr_handler)

    return logger


def log_check_result(logger: logging.Logger, check: str, passed: bool, **kwargs):
    """Log the verdict of a mathematical check"""
    logger.info(
        f"Check {check}: {'pass' if passed else 'FAIL'}",
        extra={"check": check, "passed": passed, **kwargs},
    )


def log_enumeration_progress(
    logger: logging.Logger, size: int, frontier: int, **kwargs
):
    """Log breadth-first enumeration progress"""
    logger.debug(
        f"Enumeration: {size} elements, frontier {frontier}",
        extra={"size": size, "frontier": frontier, **kwargs},
    )


def log_timing(logger: logging.Logger, operation: str, duration_ms: float, **kwargs):
    """Log how long an operation took"""
    logger.info(
        f"{operation} ({duration_ms:.2f}ms)",
        extra={"operation": operation, "duration_ms": duration_ms, **kwargs},
    )


def log_error_with_context(
    logger: logging.Logger, error: Exception, context: str, **kwargs
):
    """Log errors with additional context"""
    logger.error(
        f"{context}: {type(error).__name__}: {str(error)}",
        extra={
            "error_type": type(error).__name__,
            "error_message": str(error),
            "context": context,
            **kwargs,
        },
        exc_info=True,
    )
