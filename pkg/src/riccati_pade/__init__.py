"""High-precision Riccati-Pade quantisation.

The logarithmic derivative of an even-potential Schrodinger problem is
expanded in a power series; the zeros of Hankel determinants built from its
coefficients give eigenvalues (with upper and lower bounds), critical
couplings and complex resonances.
"""
from .hankel import HankelEval, HankelSpec, assemble, determinant, determinant_with_gradient
from .numerics import PrecisionCtx, round_decimal, table_decimal, to_decimal, truncate_decimal
from .riccati_series import (
    PotentialSpec,
    ShiftedPotentialSpec,
    nonsym_coeffs,
    parse_potential,
    shift_potential,
    symmetric_coeffs,
)
from .solver import (
    BoundReport,
    RootSequence,
    SolveConfig,
    critical_parameters,
    critical_stream,
    eigenvalue_bounds,
    fit_convergence,
    nonsym_eigenvalue,
    resonance,
)

__all__ = [
    "HankelEval",
    "HankelSpec",
    "assemble",
    "determinant",
    "determinant_with_gradient",
    "PrecisionCtx",
    "round_decimal",
    "table_decimal",
    "to_decimal",
    "truncate_decimal",
    "PotentialSpec",
    "ShiftedPotentialSpec",
    "nonsym_coeffs",
    "parse_potential",
    "shift_potential",
    "symmetric_coeffs",
    "BoundReport",
    "RootSequence",
    "SolveConfig",
    "critical_parameters",
    "critical_stream",
    "eigenvalue_bounds",
    "fit_convergence",
    "nonsym_eigenvalue",
    "resonance",
]

__version__ = "0.1.0"
