"""
Tests for pipeline orchestration.
"""
