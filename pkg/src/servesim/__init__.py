"""Discrete-event simulator for comparing serverless, managed and dedicated model serving."""

__version__ = "0.1.0"
