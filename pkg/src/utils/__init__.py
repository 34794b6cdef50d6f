"""
Utilities Package

Logging, error handling and file helpers shared by every module.
"""

from .file_utils import (
    compute_file_hash,
    compute_config_hash,
    ensure_directory_exists,
)
from .logger import get_global_logger, setup_global_logging
from .error_handler import (
    ErrorCategory,
    KfgmError,
    error_context,
    exit_code_for,
)

__all__ = [
    # File utilities
    'compute_file_hash',
    'compute_config_hash',
    'ensure_directory_exists',
    # Logging
    'get_global_logger',
    'setup_global_logging',
    # Error handling
    'ErrorCategory',
    'KfgmError',
    'error_context',
    'exit_code_for',
]
