"""
Tests for reports module.
"""
