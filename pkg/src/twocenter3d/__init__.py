"""Exact Euclidean 2-center in three dimensions."""
from .geom_core import Tolerance, Plane, Ball
from .miniball import smallest_enclosing_ball, seb_radius

__version__ = "0.1.0"
__all__ = ["Tolerance", "Plane", "Ball", "smallest_enclosing_ball", "seb_radius"]
