"""Hierarchical attention network classifier over woven narratives."""

__version__ = "0.1.0"
