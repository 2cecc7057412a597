"""
Algebra package for the HDX toolkit.
Finite fields, root systems, the Steinberg collection engine and matrix realizations.
"""

__version__ = "1.0.0"
