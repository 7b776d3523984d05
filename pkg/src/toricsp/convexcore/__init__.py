"""Exact convex analysis for piecewise-affine concave functions."""
from .hull import Facet, UpperHull, upper_hull
from .pa import ArgmaxResult, PAConcave, exact_max, exact_min, legendre_dual, pac_add, pac_argmax, sup_convolution
from .polyhedron import (
    Empty,
    LogPolyhedron,
    is_vertex,
    minimal_face_containing,
    minkowski_sum,
    poly_intersect,
    supdifferential,
)
from .polytope import PolytopeError, QPolytope
from .smooth import Smooth1DConcave, fubini_study, maximize_1d, numeric_dual_1d, smooth_roof, tabulated

__all__ = [
    "QPolytope", "PolytopeError", "PAConcave", "legendre_dual", "pac_add", "sup_convolution",
    "pac_argmax", "ArgmaxResult", "exact_min", "exact_max", "LogPolyhedron", "Empty",
    "supdifferential", "poly_intersect", "minimal_face_containing", "is_vertex", "minkowski_sum",
    "Facet", "UpperHull", "upper_hull", "Smooth1DConcave", "fubini_study", "tabulated",
    "smooth_roof", "numeric_dual_1d", "maximize_1d",
]
