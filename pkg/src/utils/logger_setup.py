# utils/logger_setup.py
"""
Logger Setup Utility
Configures console (and optionally rotating file) logging for the toolkit
"""

import logging
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Optional

from colorama import Fore, Style, init as colorama_init

colorama_init()

LEVEL_COLORS = {
    logging.DEBUG: Fore.CYAN,
    logging.INFO: Fore.GREEN,
    logging.WARNING: Fore.YELLOW,
    logging.ERROR: Fore.RED,
    logging.CRITICAL: Fore.MAGENTA,
}


class ColorFormatter(logging.Formatter):
    """Formatter that colours the level name for console output."""

    def format(self, record: logging.LogRecord) -> str:
        color = LEVEL_COLORS.get(record.levelno, "")
        original = record.levelname
        record.levelname = f"{color}{original}{Style.RESET_ALL}"
        try:
            return super().format(record)
        finally:
            record.levelname = original


def setup_logger(
    name: str = "crossimpact",
    level: int = logging.DEBUG,
    console_format: str = '[%(asctime)s] [%(levelname)s] %(message)s',
    date_format: str = '%d/%m %H:%M:%S',
    log_file: Optional[str] = None,
) -> logging.Logger:
    """
    Set up logging configuration for console output.

    Args:
        name: Logger name
        level: Logging level
        console_format: Format string for console output
        date_format: Date format string
        log_file: Optional path of a rotating log file

    Returns:
        Configured logger instance
    """
    logger = logging.getLogger(name)

    # Avoid adding handlers multiple times
    if logger.handlers:
        return logger

    logger.setLevel(level)

    console_handler = logging.StreamHandler()
    console_handler.setFormatter(ColorFormatter(console_format, date_format))
    logger.addHandler(console_handler)

    if log_file:
        add_file_handler(logger, log_file, console_format, date_format)

    return logger


def add_file_handler(
    logger: logging.Logger,
    log_file: str,
    file_format: str = '[%(asctime)s] [%(levelname)s] [%(name)s] %(message)s',
    date_format: str = '%d/%m %H:%M:%S',
) -> None:
    """Attach a rotating file handler unless one already writes to log_file."""
    path = Path(log_file).expanduser()
    path.parent.mkdir(parents=True, exist_ok=True)
    for handler in logger.handlers:
        if isinstance(handler, RotatingFileHandler) and Path(handler.baseFilename) == path.resolve():
            return
    file_handler = RotatingFileHandler(path, maxBytes=5 * 1024 * 1024, backupCount=3, encoding="utf-8")
    file_handler.setFormatter(logging.Formatter(file_format, date_format))
    logger.addHandler(file_handler)


def enable_file_logging(log_dir: str, filename: str = "crossimpact.log") -> Path:
    """Route every toolkit logger created so far to one rotating file."""
    path = Path(log_dir).expanduser() / filename
    for logger_name in list(logging.root.manager.loggerDict):
        candidate = logging.getLogger(logger_name)
        if candidate.handlers:
            add_file_handler(candidate, str(path))
    return path


def set_console_level(level: int) -> None:
    """Change the level of every toolkit logger (used by --debug)."""
    for logger_name in list(logging.root.manager.loggerDict):
        candidate = logging.getLogger(logger_name)
        if candidate.handlers:
            candidate.setLevel(level)
