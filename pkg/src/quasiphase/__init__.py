"""Regularized quasiprobability distributions for quantum-optical states."""

__version__ = "0.1.0"
