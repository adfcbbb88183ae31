"""
Pipeline layer: configuration loading, seed derivation and the stage runners.

Import stage runners from pipeline.stages directly; this package stays light
so lower layers can use pipeline.seeds without pulling in the whole toolkit.
"""

__version__ = "0.1.0"
