"""
Unit Tests Package

This package contains unit tests for individual components.
"""
