"""Potential theory for the time-degenerate diffusion operator
du/dt - a(t) * laplacian(u): fundamental solution, volume / Poisson /
single- / double-layer potentials, the Dirichlet boundary integral
solver, and nonlocal lateral trace functionals."""

from .backend import BACKEND_NAME
from .coeff import TimeCoefficient
from .geometry import Circle, Ellipse, Sphere, StarCurve, make_geometry

__version__ = "0.1.0"

__all__ = [
    "BACKEND_NAME",
    "TimeCoefficient",
    "Circle",
    "Ellipse",
    "Sphere",
    "StarCurve",
    "make_geometry",
]
