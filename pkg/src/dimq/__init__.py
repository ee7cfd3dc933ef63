"""Computational group theory toolkit for dimension subgroups of groups given by presentations."""

__version__ = "0.1.0"
