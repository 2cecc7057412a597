"""
Unit tests for the HDX toolkit
"""

__version__ = "1.0.0"
