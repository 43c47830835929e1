"""Exact verification toolkit for small nilpotent algebras."""
__version__ = "0.1.0"
