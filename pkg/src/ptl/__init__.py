"""Workbench for probabilistic team semantics."""

__version__ = "0.1.0"
