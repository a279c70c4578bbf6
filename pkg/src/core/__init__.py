"""
Core Module

Shared enums, the exception hierarchy, error classification and run
resource monitoring used by every other NDSQ package.
"""

from .error_handler import ErrorCategory, ErrorHandler, ErrorInfo, ErrorSeverity
from .exceptions import (
    AcceptanceError, CheckpointError, ConfigError, DimensionError, EvalError,
    GrammarError, NdsqError, NumericError, NumericInputError, RejectionBudgetError,
    StaleTraceError, TaskError, TrainingDivergedError, VocabularyError,
)
from .performance_monitor import ResourceSample, RunMonitor
from .types import MemoryKind, ModelKind, Precision, TaskKind

__all__ = [
    'ErrorCategory', 'ErrorHandler', 'ErrorInfo', 'ErrorSeverity',
    'AcceptanceError', 'CheckpointError', 'ConfigError', 'DimensionError', 'EvalError',
    'GrammarError', 'NdsqError', 'NumericError', 'NumericInputError', 'RejectionBudgetError',
    'StaleTraceError', 'TaskError', 'TrainingDivergedError', 'VocabularyError',
    'ResourceSample', 'RunMonitor',
    'MemoryKind', 'ModelKind', 'Precision', 'TaskKind',
]
