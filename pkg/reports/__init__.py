"""
Report tables: CSV files with sidecars and per-figure plot data.
"""

__version__ = "0.1.0"
