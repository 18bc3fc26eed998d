"""Restricted power (Laguerre) diagrams in 2 to 6 dimensions by halfspace clipping."""

from .densities import Cone, Gaussian, Sphere, Uniform, make_density
from .diagram import DomainMesh, PowerDiagram, SiteSet, compute_diagram, lift_sites
from .geometry import ConvexPolytope, HalfSpace, clip, cube_polytope, simplex_polytope
from .transport import optimize_points, optimize_weights

__all__ = [
    "Cone", "ConvexPolytope", "DomainMesh", "Gaussian", "HalfSpace", "PowerDiagram",
    "SiteSet", "Sphere", "Uniform", "clip", "compute_diagram", "cube_polytope",
    "lift_sites", "make_density", "optimize_points", "optimize_weights", "simplex_polytope",
]
