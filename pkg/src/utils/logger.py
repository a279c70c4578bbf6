"""
Logging system for NDSQ.

This module provides a centralized logging configuration: a console handler on
stderr and, once a run directory is known, a rotating file handler under
``<output_dir>/logs``.
"""

import logging
import logging.handlers
import sys
from pathlib import Path
from typing import Optional, Union

ROOT_LOGGER_NAME = "ndsq"
LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


class ContextFormatter(logging.Formatter):
    """Formatter that appends ``extra={'context': {...}}`` as ``k=v`` pairs."""

    def format(self, record):
        message = super().format(record)
        context = getattr(record, "context", None)
        if context:
            context_str = ' | '.join(f"{k}={v}" for k, v in context.items())
            message = f"{message} | Context: {context_str}"
        return message


class NdsqLogger:
    """Centralized logging system for NDSQ."""

    def __init__(self, log_level=logging.INFO, log_dir: Optional[Union[str, Path]] = None):
        """
        Initialize the logging system.

        Args:
            log_level: Logging level (default: INFO)
            log_dir: Directory for the rotating log file; console only when None
        """
        self.logger = logging.getLogger(ROOT_LOGGER_NAME)
        self.logger.setLevel(log_level)
        self.logger.propagate = False
        self.log_dir = Path(log_dir) if log_dir is not None else None
        self._setup_handlers()

    def _setup_handlers(self):
        for handler in list(self.logger.handlers):
            self.logger.removeHandler(handler)
            handler.close()

        formatter = ContextFormatter(LOG_FORMAT, datefmt='%Y-%m-%d %H:%M:%S')

        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setFormatter(formatter)
        self.logger.addHandler(console_handler)

        if self.log_dir is not None:
            self.log_dir.mkdir(parents=True, exist_ok=True)
            file_handler = logging.handlers.RotatingFileHandler(
                self.get_log_file_path(),
                maxBytes=1024 * 1024,  # 1MB
                backupCount=10,
                encoding='utf-8'
            )
            file_handler.setFormatter(formatter)
            self.logger.addHandler(file_handler)

    def get_logger(self, name=None):
        """
        Get a logger instance.

        Args:
            name (str): Optional logger name, nested under ``ndsq``

        Returns:
            logging.Logger: Logger instance
        """
        if name:
            return logging.getLogger(f"{ROOT_LOGGER_NAME}.{name}")
        return self.logger

    def get_log_file_path(self) -> Optional[Path]:
        """Path of the rotating log file, or None when logging to console only."""
        if self.log_dir is None:
            return None
        return self.log_dir / 'ndsq.log'


_logger_instance = None


def get_logger(name=None):
    """
    Get a logger instance for the application.

    Args:
        name (str): Optional logger name

    Returns:
        logging.Logger: Logger instance
    """
    global _logger_instance
    if _logger_instance is None:
        _logger_instance = NdsqLogger()
    return _logger_instance.get_logger(name)


def setup_logging(log_level=logging.INFO, log_dir: Optional[Union[str, Path]] = None) -> NdsqLogger:
    """
    Set up logging for the application.

    Args:
        log_level: Logging level name or number (default: INFO)
        log_dir: Directory for the rotating log file
    """
    global _logger_instance
    if isinstance(log_level, str):
        log_level = logging.getLevelName(log_level.upper())
    _logger_instance = NdsqLogger(log_level=log_level, log_dir=log_dir)
    return _logger_instance
