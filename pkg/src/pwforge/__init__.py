"""Exact computations for modified Patterson-Walker metrics built from projective data."""

__version__ = "0.1.0"
