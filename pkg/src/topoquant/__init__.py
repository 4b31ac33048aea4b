"""Exterior calculus, Cartan structure equations and topological
quantization conditions for gravitational fields."""

__version__ = "0.1.0"
