"""Experiment harness for the hierarchical UAV surveillance toolkit."""

__version__ = '0.1.0'
