"""Numerical laboratory for the Landau-Pekar equations of the strong-coupling polaron."""

__version__ = "0.1.0"
