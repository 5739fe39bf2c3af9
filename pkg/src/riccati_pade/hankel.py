"""Hankel matrices of series coefficients and their determinants."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import gmpy2
from gmpy2 import mpc, mpfr

from .numerics import PrecisionCtx, Scalar, is_complex

__all__ = [
    "HankelSpec",
    "HankelEval",
    "SingularMatrixError",
    "assemble",
    "determinant",
    "determinant_derivative",
    "determinant_with_gradient",
]


class SingularMatrixError(ArithmeticError):
    """Raised when Jacobi's formula needs an inverse that does not exist."""


@dataclass(frozen=True)
class HankelSpec:
    """``D x D`` Hankel matrix with entry ``(i, j) = f_{d+1+i+j}``.

    In Pade terms ``d = M - N`` and ``D = N + 1``.
    """

    D: int
    d: int = 0

    def __post_init__(self):
        if self.D < 1:
            raise ValueError("Hankel dimension must be >= 1")
        if self.d < 0:
            raise ValueError("offset d must be >= 0")

    @property
    def max_index(self) -> int:
        return self.d + 2 * self.D - 1

    @property
    def M(self) -> int:
        return self.d + self.D - 1

    @property
    def N(self) -> int:
        return self.D - 1


@dataclass(frozen=True)
class HankelEval:
    value: Scalar
    log_magnitude: mpfr
    # +1/-1/0 for real values, the unit phase value/|value| for complex ones
    sign: object
    precision_used: int
    loss_estimate: float

    @property
    def is_zero(self) -> bool:
        return self.value == 0


def assemble(coeffs, spec: HankelSpec) -> list[list]:
    """Hankel matrix built from a coefficient sequence (or a series object)."""
    f = getattr(coeffs, "coeffs", coeffs)
    if len(f) <= spec.max_index:
        raise ValueError(
            f"need coefficients up to index {spec.max_index} for D={spec.D}, d={spec.d}; got {len(f)}")
    base = spec.d + 1
    return [[f[base + i + j] for j in range(spec.D)] for i in range(spec.D)]


def _lu(a: list[list], ctx: PrecisionCtx):
    """In-place LU with partial pivoting. Returns (lu, perm, swaps, pivots, max_entry_after)."""
    n = len(a)
    perm = list(range(n))
    swaps = 0
    pivots = []
    grown = mpfr(0)
    for c in range(n):
        p = max(range(c, n), key=lambda r: abs(a[r][c]))
        if a[p][c] == 0:
            pivots.append(a[p][c])
            return a, perm, swaps, pivots, grown, c
        if p != c:
            a[c], a[p] = a[p], a[c]
            perm[c], perm[p] = perm[p], perm[c]
            swaps += 1
        piv = a[c][c]
        pivots.append(piv)
        row_c = a[c]
        for r in range(c + 1, n):
            row_r = a[r]
            m = row_r[c] / piv
            row_r[c] = m
            if m:
                for j in range(c + 1, n):
                    row_r[j] -= m * row_c[j]
        for j in range(c, n):
            v = abs(row_c[j])
            if v > grown:
                grown = v
    return a, perm, swaps, pivots, grown, None


def _finish(value, pivots, grown, max_in, ctx: PrecisionCtx) -> HankelEval:
    mag = abs(value)
    if value == 0:
        log_mag = mpfr("-inf")
        sign = 0
    else:
        log_mag = gmpy2.log(mag)
        sign = value / mag if is_complex(value) else (1 if value > 0 else -1)
    loss = 0.0
    nz = [abs(p) for p in pivots if p != 0]
    if nz and max_in > 0:
        loss += max(0.0, float(gmpy2.log2(grown / max_in)))
        loss += float(gmpy2.log2(max(nz) / min(nz)))
    return HankelEval(value=value, log_magnitude=log_mag, sign=sign,
                      precision_used=ctx.bits, loss_estimate=loss)


def determinant(matrix: Sequence[Sequence], ctx: PrecisionCtx) -> HankelEval:
    """Determinant by LU with partial pivoting at ``ctx`` precision."""
    n = len(matrix)
    if any(len(row) != n for row in matrix):
        raise ValueError("matrix must be square")
    with ctx.active():
        a = [[ctx.convert(x) for x in row] for row in matrix]
        max_in = max((abs(x) for row in a for x in row), default=mpfr(0))
        for row in a:
            for x in row:
                if not gmpy2.is_finite(x.real if isinstance(x, mpc) else x) or (
                        isinstance(x, mpc) and not gmpy2.is_finite(x.imag)):
                    raise OverflowError("non-finite matrix entry")
        a, _, swaps, pivots, grown, singular_at = _lu(a, ctx)
        if singular_at is not None:
            zero = a[0][0] * 0
            return _finish(zero, pivots, grown, max_in, ctx)
        value = -1 if swaps % 2 else 1
        for p in pivots:
            value = value * p
        if not gmpy2.is_finite(abs(value)):
            raise OverflowError("determinant overflowed the exponent range")
        return _finish(value, pivots, grown, max_in, ctx)


def _inverse_from_lu(lu, perm, n):
    # solve A X = I column by column; A = P^T L U with rows permuted by perm
    inv_cols = []
    for col in range(n):
        b = [1 if perm[i] == col else 0 for i in range(n)]
        y = []
        for i in range(n):
            acc = b[i]
            row = lu[i]
            for k in range(i):
                acc -= row[k] * y[k]
            y.append(acc)
        x = [None] * n
        for i in range(n - 1, -1, -1):
            acc = y[i]
            row = lu[i]
            for k in range(i + 1, n):
                acc -= row[k] * x[k]
            x[i] = acc / row[i]
        inv_cols.append(x)
    # inv[i][j] = inv_cols[j][i]
    return [[inv_cols[j][i] for j in range(n)] for i in range(n)]


def _replace_row_derivative(matrix, dmatrix, ctx):
    # d det = sum_i det(A with row i replaced by A'_i); valid at singular A
    total = None
    for i in range(len(matrix)):
        m = [list(r) for r in matrix]
        m[i] = list(dmatrix[i])
        v = determinant(m, ctx).value
        total = v if total is None else total + v
    return total


def determinant_with_gradient(matrix, dmatrices: Sequence, ctx: PrecisionCtx,
                              singular_fallback: bool = True):
    """Determinant plus ``d det / d theta_k`` for each ``dmatrices[k] = dA/d theta_k``.

    Uses Jacobi's formula ``det' = det * tr(A^{-1} A')`` on a single LU
    factorisation.  An exactly singular factorisation falls back to the
    row-replacement expansion when ``singular_fallback`` is set, otherwise
    raises :class:`SingularMatrixError`.
    """
    n = len(matrix)
    with ctx.active():
        a = [[ctx.convert(x) for x in row] for row in matrix]
        max_in = max((abs(x) for row in a for x in row), default=mpfr(0))
        lu, perm, swaps, pivots, grown, singular_at = _lu(a, ctx)
        if singular_at is not None:
            if not singular_fallback:
                raise SingularMatrixError("matrix is singular at working precision")
            ev = _finish(a[0][0] * 0, pivots, grown, max_in, ctx)
            return ev, [_replace_row_derivative(matrix, dm, ctx) for dm in dmatrices]
        value = -1 if swaps % 2 else 1
        for p in pivots:
            value = value * p
        ev = _finish(value, pivots, grown, max_in, ctx)
        inv = _inverse_from_lu(lu, perm, n)
        grads = []
        for dm in dmatrices:
            tr = 0
            for i in range(n):
                inv_i = inv[i]
                for k in range(n):
                    tr += inv_i[k] * dm[k][i]
            grads.append(value * tr)
        return ev, grads


def determinant_derivative(matrix, dmatrix, ctx: PrecisionCtx):
    """``d det(A) / d theta`` given ``dmatrix = dA / d theta`` (Jacobi's formula).

    Raises :class:`SingularMatrixError` when ``A`` is singular at working
    precision; callers then fall back to derivative-free iterations.
    """
    _, (g,) = determinant_with_gradient(matrix, [dmatrix], ctx, singular_fallback=False)
    return g
