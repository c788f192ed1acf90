"""Repair of small imperative programs against HyperLTL hyperproperties."""

__version__ = "0.1.0"
