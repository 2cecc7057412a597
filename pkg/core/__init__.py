"""
Core HDX construction package.
Contains the algebra layer, coset complexes, spectral analysis, the G2 laboratory and reporting.
"""

__version__ = "1.0.0"
__author__ = "chevalley-hdx"
