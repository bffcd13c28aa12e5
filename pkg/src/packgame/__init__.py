"""Exact construction, enumeration and gluing of lattice circle packings."""

__version__ = "0.1.0"
