#!/usr/bin/env python3
"""
Error Handling Utility

Provides the verifier's error taxonomy and handling helpers:
- Domain exception hierarchy with categories and CLI exit codes
- Error categorization and severity assessment
- Contextual error logging
"""

import time
import traceback
from typing import Dict, Any, Optional
from contextlib import contextmanager
from enum import Enum

from .logger import get_global_logger, AppLogger


class ErrorSeverity(Enum):
    """Error severity levels"""
    LOW = "low"
    MEDIUM = "medium"
    HIGH = "high"
    CRITICAL = "critical"


class ErrorCategory(Enum):
    """Error categories for better organization"""
    CONFIGURATION = "configuration"
    PARSE = "parse"
    SOLVER = "solver"
    VALIDATION = "validation"
    NUMERICAL = "numerical"
    FILE_IO = "file_io"
    UNKNOWN = "unknown"


# CLI exit codes
EXIT_OK = 0
EXIT_INVARIANT_FAILURE = 1
EXIT_REFUSAL = 2
EXIT_PARSE_ERROR = 3


class KfgmError(Exception):
    """Base class for every signal raised by the verifier"""

    category = ErrorCategory.UNKNOWN
    exit_code = EXIT_REFUSAL

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.details = details


class InvalidParameterError(KfgmError):
    """A parameter set violates its own invariant (e.g. unit norm)"""
    category = ErrorCategory.VALIDATION


class InvalidInputError(KfgmError):
    """Input data is malformed (wrong shape, non-finite, degenerate)"""
    category = ErrorCategory.VALIDATION


class OutOfRangeError(KfgmError):
    """An angle or scalar lies outside the open range an operation requires"""
    category = ErrorCategory.VALIDATION


class SeparatedBranchSignal(KfgmError):
    """m1 vanishes: the transfer form does not exist, use the separated-branch analysis"""
    category = ErrorCategory.VALIDATION


class InternalConsistencyError(KfgmError):
    """Two independent evaluations of the same quantity disagree"""
    category = ErrorCategory.NUMERICAL


class EvanescentRegimeError(KfgmError):
    """|E| <= mc^2 requested where only the propagating regime is allowed"""
    category = ErrorCategory.SOLVER


class CflViolationError(KfgmError):
    """Time step exceeds the stability bound cfl * dx / c"""
    category = ErrorCategory.SOLVER


class ConvergenceError(KfgmError):
    """An iterative solver did not converge within its sweep budget"""
    category = ErrorCategory.SOLVER


class InsufficientDataError(KfgmError):
    """Too few time levels or sample points for the requested estimate"""
    category = ErrorCategory.SOLVER


class UnsupportedBoundaryError(KfgmError):
    """Boundary class not supported by the requested operation"""
    category = ErrorCategory.SOLVER


class ConfigurationError(KfgmError):
    """Scenario values were parsed but refused"""
    category = ErrorCategory.CONFIGURATION


class ScenarioParseError(KfgmError):
    """Scenario or boundary input file could not be parsed"""
    category = ErrorCategory.PARSE
    exit_code = EXIT_PARSE_ERROR


def exit_code_for(error: BaseException) -> int:
    """Map any exception to the CLI exit code"""
    if isinstance(error, KfgmError):
        return error.exit_code
    return EXIT_REFUSAL


class ErrorContext:
    """Provides context for error handling"""

    def __init__(self, operation: str, category: ErrorCategory = ErrorCategory.UNKNOWN):
        self.operation = operation
        self.category = category
        self.start_time = time.time()
        self.context_data: Dict[str, Any] = {}

    def add_context(self, key: str, value: Any):
        """Add context data"""
        self.context_data[key] = value

    def get_duration(self) -> float:
        """Get operation duration"""
        return time.time() - self.start_time


class ErrorHandler:
    """Categorizes, grades and logs errors"""

    def __init__(self, logger: Optional[AppLogger] = None):
        self.logger = logger or get_global_logger()
        self.error_counts: Dict[str, int] = {}

    def categorize_error(self, error: Exception, default: ErrorCategory = ErrorCategory.UNKNOWN) -> ErrorCategory:
        """Categorize an error based on its type"""
        if isinstance(error, KfgmError):
            return error.category
        if isinstance(error, (FileNotFoundError, PermissionError, IsADirectoryError)):
            return ErrorCategory.FILE_IO
        if isinstance(error, (ArithmeticError, FloatingPointError)):
            return ErrorCategory.NUMERICAL
        if isinstance(error, (ValueError, TypeError)):
            return ErrorCategory.VALIDATION
        return default

    def get_severity(self, error: Exception, context: ErrorContext) -> ErrorSeverity:
        """Determine error severity"""
        if isinstance(error, (KeyboardInterrupt, SystemExit, MemoryError)):
            return ErrorSeverity.CRITICAL
        if context.category in (ErrorCategory.NUMERICAL, ErrorCategory.UNKNOWN):
            return ErrorSeverity.HIGH
        if context.category in (ErrorCategory.SOLVER, ErrorCategory.FILE_IO):
            return ErrorSeverity.MEDIUM
        return ErrorSeverity.LOW

    def handle_error(self, error: Exception, context: ErrorContext,
                     operation: Optional[str] = None) -> Dict[str, Any]:
        """Log an error with full context and return the logged record"""
        if operation:
            context.operation = operation

        context.category = self.categorize_error(error, context.category)
        severity = self.get_severity(error, context)

        error_key = f"{context.category.value}_{type(error).__name__}"
        self.error_counts[error_key] = self.error_counts.get(error_key, 0) + 1

        error_data = {
            'error_type': type(error).__name__,
            'error_message': str(error),
            'category': context.category.value,
            'severity': severity.value,
            'operation': context.operation,
            'duration': context.get_duration(),
            'exit_code': exit_code_for(error),
            'details': getattr(error, 'details', {}),
            'context_data': context.context_data,
            'error_count': self.error_counts[error_key],
        }

        if severity in (ErrorSeverity.CRITICAL, ErrorSeverity.HIGH):
            error_data['traceback'] = traceback.format_exc()
            self.logger.error(f"{severity.value.title()} severity error in {context.operation}: {error}",
                              data=error_data)
        elif severity == ErrorSeverity.MEDIUM:
            self.logger.warning(f"Refused {context.operation}: {error}", data=error_data)
        else:
            self.logger.warning(f"Invalid input for {context.operation}: {error}", data=error_data)

        return error_data


@contextmanager
def error_context(operation: str, category: ErrorCategory = ErrorCategory.UNKNOWN):
    """Context manager for error handling"""
    context = ErrorContext(operation, category)
    try:
        yield context
    except Exception as error:
        get_global_error_handler().handle_error(error, context)
        raise


# Global error handler instance
_global_error_handler: Optional[ErrorHandler] = None


def get_global_error_handler() -> ErrorHandler:
    """Get the global error handler instance"""
    global _global_error_handler
    if _global_error_handler is None:
        _global_error_handler = ErrorHandler()
    return _global_error_handler


def setup_global_error_handling(logger: Optional[AppLogger] = None) -> ErrorHandler:
    """Setup global error handling"""
    global _global_error_handler
    _global_error_handler = ErrorHandler(logger)
    return _global_error_handler
