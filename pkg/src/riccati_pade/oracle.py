"""Finite-difference eigenvalues in hardware floats, independent of the
Riccati/Hankel machinery.

The spectrum of ``-psi'' + V psi = E psi`` is approximated on a uniform grid on
``[-L, L]`` with Dirichlet ends, using the three-point Laplacian.  Two grids
with spacing ``h`` and ``h/2`` are combined by Richardson extrapolation
(``(4 E_{h/2} - E_h) / 3``), cancelling the ``O(h^2)`` error.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.optimize import brentq

__all__ = [
    "GridSpec",
    "OracleError",
    "grid_eigenvalues",
    "critical_check",
    "critical_estimate",
    "default_grid",
    "polynomial_potential",
]


class OracleError(RuntimeError):
    pass


@dataclass(frozen=True)
class GridSpec:
    half_width: float
    points: int

    def __post_init__(self):
        if self.points < 64:
            raise ValueError("grid needs at least 64 points")
        if self.half_width <= 0:
            raise ValueError("half-width must be positive")

    @property
    def spacing(self) -> float:
        return 2 * self.half_width / (self.points - 1)

    def refined(self) -> "GridSpec":
        # halve the spacing: (N - 1) intervals -> 2 (N - 1) intervals
        return GridSpec(self.half_width, 2 * self.points - 1)


def polynomial_potential(even_coeffs: Sequence[float]) -> Callable[[np.ndarray], np.ndarray]:
    """``V(x) = sum_j c_j x^(2j)`` for ``c = even_coeffs`` (``c[0]`` multiplies ``x^2``)."""
    coeffs = [float(c) for c in even_coeffs]

    def V(x):
        x2 = np.asarray(x, dtype=float) ** 2
        out = np.zeros_like(x2)
        for c in reversed(coeffs):
            out = (out + c) * x2
        return out

    return V


def _raw_levels(V, grid: GridSpec, count: int) -> np.ndarray:
    x = np.linspace(-grid.half_width, grid.half_width, grid.points)[1:-1]
    h = grid.spacing
    diag = 2.0 / h**2 + V(x)
    off = np.full(len(x) - 1, -1.0 / h**2)
    try:
        return eigh_tridiagonal(diag, off, select="i", select_range=(0, count - 1),
                                eigvals_only=True)
    except np.linalg.LinAlgError as exc:
        raise OracleError(f"eigensolver failed: {exc}") from exc


def grid_eigenvalues(V, grid: GridSpec, count: int, check_box: bool = True) -> np.ndarray:
    """Lowest ``count`` eigenvalues, Richardson-extrapolated over ``h`` and ``h/2``.

    ``V`` is a vectorised callable or a sequence of even coefficients.
    """
    if not callable(V):
        V = polynomial_potential(V)
    coarse = _raw_levels(V, grid, count)
    fine = _raw_levels(V, grid.refined(), count)
    levels = (4 * fine - coarse) / 3
    if check_box:
        wall = min(V(np.array([-grid.half_width, grid.half_width])))
        if wall - levels[-1] < 20:
            raise OracleError(
                f"box too small: V(+-L) = {wall:.3g} is within 20 of E = {levels[-1]:.6g}")
    return levels


def default_grid(V, count: int, points: int = 2001, margin: float = 80.0) -> GridSpec:
    """Smallest symmetric box whose walls exceed the requested levels by ``margin``.

    The box grows until the estimate of the highest requested level sits at
    least ``margin`` below both walls.
    """
    if not callable(V):
        V = polynomial_potential(V)
    L = 4.0
    for _ in range(60):
        grid = GridSpec(L, points)
        top = _raw_levels(V, grid, count)[-1]
        wall = min(V(np.array([-L, L])))
        if wall - top >= margin + 1:
            return grid
        L *= 1.15
    raise OracleError("could not find an adequate box")


def _double_well(g):
    return polynomial_potential([-1.0, g])


def _level_at(k: int, g: float, points: int = 2001) -> float:
    V = _double_well(g)
    grid = default_grid(V, k + 1, points=points)
    return float(grid_eigenvalues(V, grid, k + 1)[k])


def critical_check(k: int, g_value, points: int = 2001) -> float:
    """``E_k`` of ``-x^2 + g x^4`` at ``g_value``; near zero at a critical coupling."""
    if k > 5:
        raise ValueError("grid oracle is only validated for k <= 5")
    return _level_at(k, float(g_value), points)


def critical_estimate(k: int, points: int = 1201) -> float:
    """Hardware-float estimate of the coupling ``g_k`` with ``E_k(g_k) = 0``.

    ``E_k(g)`` increases with ``g``; the root is bracketed on a geometric
    ladder and polished with Brent's method.  Good to roughly 1e-7 relative,
    which is plenty for seeding the high-precision search.
    """
    hi = 2.0
    lo = hi
    e_hi = _level_at(k, hi, points)
    if e_hi <= 0:
        raise OracleError("E_k(2) is not positive; unexpected spectrum")
    while True:
        lo = hi / 1.5
        e_lo = _level_at(k, lo, points)
        if e_lo < 0:
            break
        hi = lo
        if lo < 1e-4:
            raise OracleError(f"no sign change found for k={k}")
    return brentq(lambda g: _level_at(k, g, points), lo, hi, xtol=1e-14, rtol=1e-12)
