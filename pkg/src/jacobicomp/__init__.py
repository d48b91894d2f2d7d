"""Numerical comparison geometry along a single geodesic."""

from .kernels import BACKEND

__all__ = ["BACKEND"]

__version__ = "0.1.0"
