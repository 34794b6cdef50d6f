"""
Tests Package

Test modules for the KFGM interval verifier.
"""
