"""
Command Line Module

Entry point and command implementations for gen, train, eval, gradcheck
and params.
"""

from .commands import COMMANDS
from .main import build_parser, dispatch, main, overrides_from_args

__all__ = ['COMMANDS', 'build_parser', 'dispatch', 'main', 'overrides_from_args']
