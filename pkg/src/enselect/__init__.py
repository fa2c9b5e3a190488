"""Budgeted selection and aggregation for correlated binary classifier ensembles."""

__version__ = "0.1.0"
