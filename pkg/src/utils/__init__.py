"""Logging setup shared by every NDSQ package."""

from .logger import ContextFormatter, NdsqLogger, get_logger, setup_logging

__all__ = ['ContextFormatter', 'NdsqLogger', 'get_logger', 'setup_logging']
