"""Taylor coefficients of the regularised logarithmic derivative.

For a parity-symmetric potential ``V(x) = sum_j V_j x^(2j)`` and parity ``s``
the function ``f(x) = s/x - psi'(x)/psi(x)`` has the odd expansion
``f(x) = sum_j f_j x^(2j+1)`` whose coefficients follow from the Riccati
equation ``f' + 2 s f / x - f^2 + V - E = 0``:

    f_0 = E / (2s + 1)
    f_n = (sum_{j<n} f_j f_{n-1-j} - V_n) / (2n + 2s + 1),   n >= 1

For the expansion about an arbitrary point ``x_m`` (used for the well-centred
variant) ``f(u) = sum_j f_j u^j`` with ``u = x - x_m`` obeys ``f' = f^2 + E - U``:

    (n + 1) f_{n+1} = sum_{j<=n} f_j f_{n-j} - U_n + E delta_{n0}

with ``f_0`` a free parameter.  Both recurrences are carried together with
their derivatives so that Newton steps can use exact Jacobians.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Optional

import gmpy2

from .numerics import PrecisionCtx, Scalar

__all__ = [
    "PotentialSpec",
    "ShiftedPotentialSpec",
    "RiccatiSeries",
    "NonSymSeries",
    "parse_potential",
    "symmetric_coeffs",
    "nonsym_coeffs",
    "shift_potential",
    "quartic_minimum",
]


@dataclass(frozen=True)
class PotentialSpec:
    """Even polynomial potential ``V(x) = sum_{j>=1} V_j x^(2j)`` (no constant).

    Coefficients may be anything :meth:`PrecisionCtx.real` accepts; keeping
    them as decimal strings or Fractions lets every precision see the exact
    input.
    """

    even_coeffs: tuple

    def __post_init__(self):
        coeffs = tuple(self.even_coeffs)
        object.__setattr__(self, "even_coeffs", coeffs)
        if not coeffs:
            raise ValueError("potential needs at least one coefficient")
        if all(_is_zero(c) for c in coeffs):
            raise ValueError("potential has no nonzero coefficient")

    @property
    def degree(self) -> int:
        return 2 * len(self.even_coeffs)

    def with_coeff(self, j: int, value) -> "PotentialSpec":
        """Copy with ``V_j`` (1-based, multiplying ``x^(2j)``) replaced."""
        coeffs = list(self.even_coeffs)
        while len(coeffs) < j:
            coeffs.append(0)
        coeffs[j - 1] = value
        return PotentialSpec(tuple(coeffs))

    def values(self, ctx: PrecisionCtx) -> list:
        return [ctx.real(c) for c in self.even_coeffs]

    def full_coeffs(self, ctx: PrecisionCtx) -> list:
        """Coefficients of ``x^0 .. x^degree`` (odd and constant entries zero)."""
        out = [ctx.real(0)] * (self.degree + 1)
        for j, c in enumerate(self.even_coeffs, start=1):
            out[2 * j] = ctx.real(c)
        return out

    def evaluate(self, x, ctx: PrecisionCtx):
        with ctx.active():
            x2 = x * x
            acc = ctx.real(0)
            for c in reversed(self.values(ctx)):
                acc = (acc + c) * x2
            return acc


def _is_zero(c) -> bool:
    try:
        return Fraction(str(c)) == 0
    except (ValueError, ZeroDivisionError):
        return False


def parse_potential(text: str) -> PotentialSpec:
    """Parse ``"V1,V2,..."`` where ``V1`` multiplies ``x^2``, ``V2`` ``x^4``, ...

    Entries stay decimal strings so they can be read at any precision.
    """
    parts = [p.strip() for p in text.split(",")]
    if not parts or any(p == "" for p in parts):
        raise ValueError(f"malformed potential {text!r}")
    for p in parts:
        gmpy2.mpfr(p)  # validates the literal
    return PotentialSpec(tuple(parts))


@dataclass(frozen=True)
class ShiftedPotentialSpec:
    """Potential re-expanded about ``shift``: ``V(shift + u) = sum_n U_n u^n``."""

    full_coeffs: tuple
    shift: Scalar

    @property
    def constant(self):
        return self.full_coeffs[0]

    def evaluate(self, u, ctx: PrecisionCtx):
        with ctx.active():
            acc = ctx.real(0)
            for c in reversed(self.full_coeffs):
                acc = acc * u + c
            return acc


@dataclass(frozen=True)
class RiccatiSeries:
    s: int
    coeffs: tuple
    dE_coeffs: tuple
    energy: Scalar
    potential: PotentialSpec
    # derivative w.r.t. the potential coefficient V_{param_index}, when requested
    dparam_coeffs: Optional[tuple] = None
    param_index: Optional[int] = None

    def __len__(self):
        return len(self.coeffs)


@dataclass(frozen=True)
class NonSymSeries:
    coeffs: tuple
    dE_coeffs: tuple
    df0_coeffs: tuple
    energy: Scalar
    f0: Scalar
    potential: ShiftedPotentialSpec

    def __len__(self):
        return len(self.coeffs)


def symmetric_coeffs(pot: PotentialSpec, s: int, E, nmax: int, ctx: PrecisionCtx,
                     param_index: Optional[int] = None) -> RiccatiSeries:
    """Coefficients ``f_0 .. f_nmax`` for parity ``s`` at energy ``E``.

    ``E`` may be real or complex.  ``param_index=j`` additionally returns
    ``d f_n / d V_j``, used when the root is sought in a potential coefficient
    (the critical-coupling problem) rather than in the energy.
    """
    if s not in (0, 1):
        raise ValueError("parity s must be 0 or 1")
    if nmax < 1:
        raise ValueError("nmax must be >= 1")
    V = pot.values(ctx)
    with ctx.active():
        E = ctx.convert(E)
        one = ctx.real(1)
        zero = ctx.real(0)
        f = [E / (2 * s + 1)]
        df = [one / (2 * s + 1)]
        dp = [zero] if param_index is not None else None
        for n in range(1, nmax + 1):
            denom = 2 * n + 2 * s + 1
            half = n // 2
            # sum_{j=0}^{n-1} f_j f_{n-1-j} using the symmetry of the convolution
            acc = zero
            dacc = zero
            pacc = zero
            for j in range(half):
                acc += f[j] * f[n - 1 - j]
                dacc += df[j] * f[n - 1 - j] + f[j] * df[n - 1 - j]
                if dp is not None:
                    pacc += dp[j] * f[n - 1 - j] + f[j] * dp[n - 1 - j]
            acc *= 2
            dacc *= 2
            pacc *= 2
            if n % 2:
                m = half
                acc += f[m] * f[m]
                dacc += 2 * f[m] * df[m]
                if dp is not None:
                    pacc += 2 * f[m] * dp[m]
            Vn = V[n - 1] if n <= len(V) else zero
            f.append((acc - Vn) / denom)
            df.append(dacc / denom)
            if dp is not None:
                dVn = one if n == param_index else zero
                dp.append((pacc - dVn) / denom)
    return RiccatiSeries(
        s=s,
        coeffs=tuple(f),
        dE_coeffs=tuple(df),
        energy=E,
        potential=pot,
        dparam_coeffs=tuple(dp) if dp is not None else None,
        param_index=param_index,
    )


def nonsym_coeffs(pot: ShiftedPotentialSpec, E, f0, nmax: int, ctx: PrecisionCtx) -> NonSymSeries:
    """Coefficients of ``f(u) = sum_j f_j u^j`` about the expansion point.

    The shifted potential keeps its constant ``U_0``; it enters only through
    ``f_1 = f_0^2 + E - U_0`` so ``E`` stays on the original energy scale.
    """
    if nmax < 2:
        raise ValueError("nmax must be >= 2")
    U = [ctx.convert(u) for u in pot.full_coeffs]
    with ctx.active():
        E = ctx.convert(E)
        f0 = ctx.convert(f0)
        zero = ctx.real(0)
        one = ctx.real(1)
        f = [f0]
        dfE = [zero]
        dff = [one]
        for n in range(nmax):
            acc = zero
            accE = zero
            accf = zero
            for j in range(n + 1):
                acc += f[j] * f[n - j]
                accE += dfE[j] * f[n - j]
                accf += dff[j] * f[n - j]
            accE *= 2
            accf *= 2
            Un = U[n] if n < len(U) else zero
            if n == 0:
                acc += E
                accE += one
            f.append((acc - Un) / (n + 1))
            dfE.append(accE / (n + 1))
            dff.append(accf / (n + 1))
    return NonSymSeries(coeffs=tuple(f), dE_coeffs=tuple(dfE), df0_coeffs=tuple(dff),
                        energy=E, f0=f0, potential=pot)


def shift_potential(pot: PotentialSpec, x_m, ctx: PrecisionCtx) -> ShiftedPotentialSpec:
    """Exact binomial re-expansion ``V(x_m + u) = sum_n U_n u^n``."""
    full = pot.full_coeffs(ctx)
    with ctx.active():
        x_m = ctx.convert(x_m)
        deg = len(full) - 1
        U = [ctx.real(0)] * (deg + 1)
        powers = [ctx.real(1)]
        for _ in range(deg):
            powers.append(powers[-1] * x_m)
        for p, c in enumerate(full):
            if c == 0:
                continue
            for n in range(p + 1):
                U[n] += c * comb(p, n) * powers[p - n]
    return ShiftedPotentialSpec(full_coeffs=tuple(U), shift=x_m)


def quartic_minimum(pot: PotentialSpec, ctx: PrecisionCtx):
    """Positive minimum ``sqrt(-V_1 / (2 V_2))`` of ``V_1 x^2 + V_2 x^4``."""
    if len(pot.even_coeffs) != 2:
        raise ValueError("quartic_minimum needs exactly two coefficients (x^2, x^4)")
    v1, v2 = pot.values(ctx)
    if not (v1 < 0 < v2):
        raise ValueError("a double-well minimum needs V_1 < 0 < V_2")
    with ctx.active():
        return gmpy2.sqrt(-v1 / (2 * v2))
