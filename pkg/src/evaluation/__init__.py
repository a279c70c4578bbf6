"""
Evaluation Module

Coarse/fine accuracy and the batched greedy-decoding test protocol.
"""

from .metrics import EvalReport, accuracy, first_error
from .runner import run_eval, write_report

__all__ = ['EvalReport', 'accuracy', 'first_error', 'run_eval', 'write_report']
