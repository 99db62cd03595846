"""Numerical laboratory for geodesic-length functions on the Teichmüller
space of the once-punctured torus."""

__version__ = "0.1.0"
