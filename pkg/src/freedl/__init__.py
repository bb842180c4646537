"""Reasoning workbench for epistemic and temporal free description logics."""

__version__ = "0.1.0"
