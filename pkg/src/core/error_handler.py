"""
Error Handling for NDSQ

This module classifies failures raised anywhere in the library, logs them once
with context, keeps per-category statistics, and turns them into the
machine-readable error records and exit codes the command line reports.
"""

import json
import threading
import traceback
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from typing import Any, Dict, List, Optional, Type

from utils.logger import get_logger


class ErrorSeverity(Enum):
    """Error severity levels."""
    LOW = "low"
    MEDIUM = "medium"
    HIGH = "high"
    CRITICAL = "critical"


class ErrorCategory(Enum):
    """Error categories for classification."""
    CONFIGURATION = "configuration"
    DIMENSION = "dimension"
    NUMERIC = "numeric"
    DATA = "data"
    GRAMMAR = "grammar"
    CHECKPOINT = "checkpoint"
    ACCEPTANCE = "acceptance"
    RESOURCE = "resource"
    UNKNOWN = "unknown"


# Exit codes: 1 usage/configuration/data, 2 numeric failure, 3 acceptance failure.
EXIT_CODES = {
    ErrorCategory.CONFIGURATION: 1,
    ErrorCategory.DATA: 1,
    ErrorCategory.GRAMMAR: 1,
    ErrorCategory.CHECKPOINT: 1,
    ErrorCategory.RESOURCE: 1,
    ErrorCategory.UNKNOWN: 1,
    ErrorCategory.DIMENSION: 2,
    ErrorCategory.NUMERIC: 2,
    ErrorCategory.ACCEPTANCE: 3,
}

_SEVERITY = {
    ErrorCategory.NUMERIC: ErrorSeverity.HIGH,
    ErrorCategory.DIMENSION: ErrorSeverity.HIGH,
    ErrorCategory.ACCEPTANCE: ErrorSeverity.HIGH,
    ErrorCategory.RESOURCE: ErrorSeverity.CRITICAL,
    ErrorCategory.UNKNOWN: ErrorSeverity.CRITICAL,
}


@dataclass
class ErrorInfo:
    """Error information structure."""
    timestamp: datetime
    error_type: Type[BaseException]
    error_message: str
    severity: ErrorSeverity
    category: ErrorCategory
    command: Optional[str] = None
    context: Dict[str, Any] = field(default_factory=dict)
    stack_trace: Optional[str] = None

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.category]

    def to_record(self) -> Dict[str, Any]:
        """Machine-readable error record."""
        return {
            "error": self.error_type.__name__,
            "category": self.category.value,
            "severity": self.severity.value,
            "message": self.error_message,
            "command": self.command,
            "exit_code": self.exit_code,
            "context": {k: _jsonable(v) for k, v in self.context.items()},
            "timestamp": self.timestamp.isoformat(timespec="seconds"),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_record(), sort_keys=True)


def _jsonable(value: Any) -> Any:
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    return str(value)


class ErrorHandler:
    """
    Central error classification and reporting.

    One instance is owned by the command dispatcher; library code only raises.
    """

    def __init__(self):
        self.logger = get_logger(__name__)
        self.error_history: List[ErrorInfo] = []
        self.error_lock = threading.Lock()
        self.error_count = 0
        self.category_counts: Dict[ErrorCategory, int] = {}

    def handle_error(self, exception: BaseException, command: Optional[str] = None) -> ErrorInfo:
        """
        Classify, log and record an error.

        Args:
            exception: The exception that occurred
            command: CLI command that was running, if any

        Returns:
            ErrorInfo with the category, severity and exit code
        """
        with self.error_lock:
            error_info = self._create_error_info(exception, command)
            self.error_history.append(error_info)
            self.error_count += 1
            self.category_counts[error_info.category] = (
                self.category_counts.get(error_info.category, 0) + 1
            )
            self._log_error_with_context(error_info)
            return error_info

    def _create_error_info(self, exception: BaseException, command: Optional[str]) -> ErrorInfo:
        category = self._classify_error(exception)
        return ErrorInfo(
            timestamp=datetime.now(),
            error_type=type(exception),
            error_message=str(exception),
            severity=_SEVERITY.get(category, ErrorSeverity.MEDIUM),
            category=category,
            command=command,
            context=dict(getattr(exception, "context", {}) or {}),
            stack_trace="".join(traceback.format_exception(
                type(exception), exception, exception.__traceback__)),
        )

    def _classify_error(self, exception: BaseException) -> ErrorCategory:
        """Classify by the category the exception carries, then by builtin type."""
        category = getattr(exception, "category", None)
        if isinstance(category, ErrorCategory):
            return category
        if isinstance(exception, (FileNotFoundError, IsADirectoryError, PermissionError)):
            return ErrorCategory.CONFIGURATION
        if isinstance(exception, (FloatingPointError, OverflowError, ZeroDivisionError)):
            return ErrorCategory.NUMERIC
        if isinstance(exception, MemoryError):
            return ErrorCategory.RESOURCE
        return ErrorCategory.UNKNOWN

    def _log_error_with_context(self, error_info: ErrorInfo):
        context = {
            "error_type": error_info.error_type.__name__,
            "category": error_info.category.value,
            "severity": error_info.severity.value,
            **error_info.context,
        }
        if error_info.command:
            context["command"] = error_info.command
        self.logger.error(f"Error occurred: {error_info.error_message}", extra={"context": context})
        if error_info.stack_trace:
            self.logger.debug(f"Stack trace: {error_info.stack_trace}")

    def get_error_statistics(self) -> Dict[str, Any]:
        with self.error_lock:
            return {
                "total_errors": self.error_count,
                "by_category": {c.value: n for c, n in self.category_counts.items()},
            }
