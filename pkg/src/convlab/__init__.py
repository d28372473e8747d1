"""Certified checks for witnesses separating modes of convergence of function sequences."""

__version__ = "0.1.0"
