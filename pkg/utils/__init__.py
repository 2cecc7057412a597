"""
Utilities package for the HDX toolkit.
Contains logging and diagnostics helpers.
"""

__version__ = "1.0.0"
