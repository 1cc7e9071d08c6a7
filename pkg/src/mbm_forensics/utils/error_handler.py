"""
Error handling utilities for MBM Forensics.

Corpus-level work must not stop at the first broken video: failures are
recorded here with their context and reported at the end, while the
offending entry is excluded from the feature table.
"""

import threading
import time
import functools
from enum import Enum
from dataclasses import dataclass, field
from typing import Dict, List, Callable, Any
from collections import defaultdict

from ..core.exceptions import MbmError, ErrorCategory, VideoNotFound
from ..utils.logger import get_logger, log_error_with_context

logger = get_logger(__name__)


class ErrorSeverity(Enum):
    """Error severity levels for classification."""
    LOW = "low"           # Entry skipped, run continues
    MEDIUM = "medium"     # Degraded result, should be reported
    HIGH = "high"         # Run cannot produce a meaningful result


@dataclass
class ErrorContext:
    """Context information for error handling."""
    component: str
    operation: str
    subject: str = ""
    timestamp: float = field(default_factory=time.time)
    severity: ErrorSeverity = ErrorSeverity.LOW


@dataclass
class ErrorRecord:
    """A failure kept for the end-of-run report."""
    subject: str
    component: str
    operation: str
    error_type: str
    message: str
    category: str
    severity: str


class ErrorHandler:
    """Collects non-fatal failures of a batch run."""

    def __init__(self):
        self._records: List[ErrorRecord] = []
        self._error_counts: defaultdict = defaultdict(int)
        self._lock = threading.Lock()

    def handle_error(self, error: Exception, context: ErrorContext) -> ErrorRecord:
        """
        Record an error and log it at the level its severity implies.

        Args:
            error: The exception that occurred
            context: Error context information

        Returns:
            The stored ErrorRecord
        """
        category = error.category.value if isinstance(error, MbmError) else "unexpected"
        record = ErrorRecord(
            subject=context.subject,
            component=context.component,
            operation=context.operation,
            error_type=type(error).__name__,
            message=str(error),
            category=category,
            severity=context.severity.value,
        )

        with self._lock:
            self._records.append(record)
            self._error_counts[category] += 1

        operation = f"{context.component}.{context.operation}"
        if context.severity == ErrorSeverity.HIGH:
            log_error_with_context(logger, error, operation, subject=context.subject, category=category)
        else:
            subject = f" [{context.subject}]" if context.subject else ""
            logger.warning(f"Error in {operation}{subject}: {type(error).__name__}: {error}")

        return record

    @property
    def records(self) -> List[ErrorRecord]:
        with self._lock:
            return list(self._records)

    def get_error_stats(self) -> Dict[str, Any]:
        """Get error statistics summary."""
        with self._lock:
            return {
                'total_errors': len(self._records),
                'error_counts_by_category': dict(self._error_counts),
                'failed_subjects': sorted(r.subject for r in self._records if r.subject),
            }

    def clear(self) -> None:
        with self._lock:
            self._records.clear()
            self._error_counts.clear()


def handle_error(component: str, operation: str):
    """
    Decorator translating stray OS errors into pipeline errors.

    MbmError subclasses pass through untouched; FileNotFoundError becomes
    VideoNotFound and other OSErrors become an IO-category MbmError, so the
    CLI can always map a failure to an exit code.

    Args:
        component: Component name (e.g., 'orchestrator')
        operation: Operation name (e.g., 'recompress')
    """
    def decorator(func: Callable) -> Callable:
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            try:
                return func(*args, **kwargs)
            except MbmError:
                raise
            except FileNotFoundError as e:
                logger.debug(f"{component}.{operation}: {e}")
                raise VideoNotFound(str(e)) from e
            except OSError as e:
                logger.debug(f"{component}.{operation}: {e}")
                error = MbmError(f"{operation}: {e}")
                error.category = ErrorCategory.IO
                raise error from e

        return wrapper
    return decorator
