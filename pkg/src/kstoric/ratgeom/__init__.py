"""Exact rational convex geometry: polytopes, fans and piecewise functions."""

from .fan import Fan, normal_fan
from .functions import NonConvexError, PiecewisePolynomial, PLFunction, interpolate
from .linalg import as_fraction, as_vec
from .polytope import (
    GeometryError,
    LatticePolytope,
    barycenter,
    facet_lattice_volume,
    from_halfspaces,
    hull,
    lattice_point_count,
    lattice_points,
    lp_optimize,
    minkowski_combination,
    minkowski_sum,
    mixed_volume,
    slice_polytope,
    volume,
)

__all__ = [
    "Fan", "GeometryError", "LatticePolytope", "NonConvexError", "PLFunction",
    "PiecewisePolynomial", "as_fraction", "as_vec", "barycenter", "facet_lattice_volume",
    "from_halfspaces", "hull", "interpolate", "lattice_point_count", "lattice_points",
    "lp_optimize", "minkowski_combination", "minkowski_sum", "mixed_volume", "normal_fan",
    "slice_polytope", "volume",
]
