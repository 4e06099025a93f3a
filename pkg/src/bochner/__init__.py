"""bochner: weighted vector-valued Fourier calculus at desk scale.

Periodic grids of Banach-valued samples, operator-valued multiplier
machinery, embedding-inequality instrumentation, and spectral solvers for
abstract elliptic and parabolic model problems, each paired with
machine-checkable uniformity reports.
"""

from .grids import (
    Anisotropy,
    Grid,
    GridFunction,
    ValueSpace,
    forward_transform,
    inverse_transform,
    mixed_norm,
    sobolev_lions_norm,
    spectral_derivative,
    weighted_lp_norm,
)
from .operators import (
    DiagonalOperator,
    MatrixOperator,
    RBoundEstimate,
    Sector,
    ellipticity_constant,
    matrix_rpositivity_check,
    positivity_bound,
    r_bound_estimate,
)
from .weights import Weight, ap_constant, ap_constants_by_generation, degenerate_substitution

__all__ = [
    "Anisotropy",
    "DiagonalOperator",
    "Grid",
    "GridFunction",
    "MatrixOperator",
    "RBoundEstimate",
    "Sector",
    "ValueSpace",
    "Weight",
    "ap_constant",
    "ap_constants_by_generation",
    "degenerate_substitution",
    "ellipticity_constant",
    "forward_transform",
    "inverse_transform",
    "matrix_rpositivity_check",
    "mixed_norm",
    "positivity_bound",
    "r_bound_estimate",
    "sobolev_lions_norm",
    "spectral_derivative",
    "weighted_lp_norm",
]

__version__ = "0.1.0"
