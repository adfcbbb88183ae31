"""
Tests for storage module.
"""
