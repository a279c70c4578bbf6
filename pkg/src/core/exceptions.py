"""
Exception hierarchy for NDSQ.

Every library error derives from ``NdsqError`` and carries the category the
error handler uses to pick a log severity and a process exit code.
"""

from typing import Any, Dict, Optional

from .error_handler import ErrorCategory


class NdsqError(Exception):
    """Base class for all NDSQ errors."""

    category = ErrorCategory.UNKNOWN

    def __init__(self, message: str, **context: Any):
        super().__init__(message)
        self.message = message
        self.context: Dict[str, Any] = dict(context)


class ConfigError(NdsqError, ValueError):
    """Invalid, inconsistent or unreadable configuration."""
    category = ErrorCategory.CONFIGURATION


class DimensionError(NdsqError, ValueError):
    """Array shape or width does not match the structure it is applied to."""
    category = ErrorCategory.DIMENSION


class NumericInputError(NdsqError, ValueError):
    """Non-finite or out-of-range numeric input."""
    category = ErrorCategory.NUMERIC


class NumericError(NdsqError, ArithmeticError):
    """A forward or backward computation produced a non-finite value."""
    category = ErrorCategory.NUMERIC


class VocabularyError(NdsqError, ValueError):
    """Symbol or index outside the vocabulary."""
    category = ErrorCategory.DATA


class GrammarError(NdsqError, ValueError):
    """Malformed synchronous grammar."""
    category = ErrorCategory.GRAMMAR


class TaskError(NdsqError, ValueError):
    """Task generator called with parameters it cannot honour."""
    category = ErrorCategory.DATA


class RejectionBudgetError(TaskError):
    """Rejection sampler exhausted its attempt budget."""

    def __init__(self, message: str, attempts: int, **context: Any):
        super().__init__(message, attempts=attempts, **context)
        self.attempts = attempts


class StaleTraceError(NdsqError, ValueError):
    """Trace does not belong to the model/example it is replayed against."""
    category = ErrorCategory.NUMERIC


class TrainingDivergedError(NumericError):
    """Training loss became non-finite."""

    def __init__(self, message: str, batch: int, last_good_model: Any = None,
                 checkpoint_path: Optional[str] = None, **context: Any):
        super().__init__(message, batch=batch, checkpoint=checkpoint_path, **context)
        self.batch = batch
        self.last_good_model = last_good_model
        self.checkpoint_path = checkpoint_path


class EvalError(NdsqError, ValueError):
    """Evaluation called on empty or malformed data."""
    category = ErrorCategory.DATA


class CheckpointError(NdsqError, ValueError):
    """Unreadable or inconsistent checkpoint file."""
    category = ErrorCategory.CHECKPOINT


class AcceptanceError(NdsqError):
    """A verification check (gradient, oracle) failed."""
    category = ErrorCategory.ACCEPTANCE
