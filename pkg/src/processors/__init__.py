"""
Processors Package

Index-ordered batch execution for independent parameter samples.
"""

from .batch_processor import run_indexed

__all__ = [
    'run_indexed',
]
