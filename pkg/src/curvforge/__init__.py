"""Numerical Riemannian geometry toolkit: curvature engines, metric deformations and their checks."""

__version__ = "0.1.0"
