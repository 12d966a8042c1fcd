"""Forward and inverse problems for the clamped vibrating plate on convex domains."""

from .convex import (
    ConvexBody2D,
    DCPair,
    SupportFunction2D,
    boundary_integral,
    boundary_point,
    curvature_measure,
    dc_decompose_basis,
    disk,
    ellipse,
    evaluate_support,
    homogeneous_extension,
    minkowski_sum,
)
from .inverse import (
    ATensor,
    BasisSet,
    ReconstructionSolution,
    SolverOptions,
    assemble_A,
    build_basis,
    jacobian,
    reconstruct_body,
    residuals,
    solve_quadratic_system,
)
from .mesh import TriangleMesh, generate_mesh
from .pipeline import ForwardConfig, forward, roundtrip, verify_consistency
from .plate import (
    EigenPair,
    apply_clamped_bc,
    assemble,
    boundary_laplacian_trace,
    rellich_check,
    solve_eigenpairs,
)
from .sfunctions import SFunction, extract_sfunctions, load_sfunctions, save_sfunctions, verify_normalization

__version__ = "0.1.0"
