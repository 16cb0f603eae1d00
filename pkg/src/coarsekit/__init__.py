"""Finite-scale coarse geometry: covers, nerves, coarsening spaces, Roe matrices and K-group bookkeeping."""

__version__ = "0.1.0"
