"""Phase-difference dynamics of three impact-coupled clocks in a line."""

__version__ = "0.1.0"

from .core import (
    CouplingParams,
    Curve2D,
    FixedPointInfo,
    PhasePoint,
    Window,
    apply_line_map,
    apply_line_map_inverse,
    apply_triangle_map,
    fixed_points,
    jacobian,
    nullclines,
    perturbation_field,
)
from .symmetry import (
    InvariantLine,
    InvariantSquare,
    SymmetryTransform,
    apply_transform,
    check_equivariance,
    on_invariant_line,
    s10_internal_rotation,
    square_membership,
    wrap_to_fundamental,
)
from .manifolds import (
    ManifoldBranch,
    SeparatrixCurve,
    build_separatrix,
    classify_region,
    grow_manifold,
)
from .basin import BasinRaster, convergence_rate, iterate_to_attractor, rasterize_basin
from .simulate import compare_with_map, simulate

__all__ = [
    "BasinRaster", "CouplingParams", "Curve2D", "FixedPointInfo", "InvariantLine",
    "InvariantSquare", "ManifoldBranch", "PhasePoint", "SeparatrixCurve",
    "SymmetryTransform", "Window", "apply_line_map", "apply_line_map_inverse",
    "apply_transform", "apply_triangle_map", "build_separatrix", "check_equivariance",
    "classify_region", "compare_with_map", "convergence_rate", "fixed_points",
    "grow_manifold", "iterate_to_attractor", "jacobian", "nullclines",
    "on_invariant_line", "perturbation_field", "rasterize_basin", "s10_internal_rotation",
    "simulate", "square_membership", "wrap_to_fundamental",
]
