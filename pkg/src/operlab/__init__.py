"""Numerical laboratory for the sl2 Gaudin model and its PGL2-opers."""

__version__ = "0.1.0"
