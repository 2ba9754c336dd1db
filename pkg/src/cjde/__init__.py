"""Exact engine for split Courant-Jacobi algebroids and Dirac-Jacobi deformations."""

__version__ = "0.1.0"
