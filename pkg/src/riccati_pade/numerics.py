"""Arbitrary-precision scalars backed by MPFR/MPC (via gmpy2).

Precision lives in an explicit :class:`PrecisionCtx` that callers pass around.
Arithmetic inside a numerical routine runs under ``with ctx.active():`` so the
working precision is scoped to that call and never leaks into global state.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

import gmpy2
from gmpy2 import mpc, mpfr

__all__ = [
    "MIN_BITS",
    "PrecisionCtx",
    "with_precision",
    "Scalar",
    "is_complex",
    "truncate_decimal",
    "round_decimal",
    "table_decimal",
    "to_decimal",
    "exact_ratio",
]

MIN_BITS = 192

Scalar = Union[mpfr, mpc]


@dataclass(frozen=True)
class PrecisionCtx:
    """Working precision in binary digits.

    Instances are immutable; escalation produces a new context via
    :meth:`raised` or :meth:`scaled`.
    """

    bits: int
    _gctx: gmpy2.context = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not isinstance(self.bits, int) or self.bits < MIN_BITS:
            raise ValueError(f"precision must be an integer >= {MIN_BITS} bits, got {self.bits!r}")
        object.__setattr__(self, "_gctx", gmpy2.context(precision=self.bits))

    @property
    def decimal_digits(self) -> int:
        return math.floor(self.bits * 0.30103)

    def active(self) -> gmpy2.context:
        # a fresh copy per use keeps nested/threaded use independent
        return gmpy2.context(self._gctx)

    def raised(self, extra: int) -> "PrecisionCtx":
        return PrecisionCtx(self.bits + extra)

    def scaled(self, factor: int) -> "PrecisionCtx":
        return PrecisionCtx(self.bits * factor)

    def real(self, x) -> mpfr:
        """Convert ``x`` (str, int, Fraction, float, mpfr) to an mpfr at this precision."""
        with self.active():
            if isinstance(x, Fraction):
                return mpfr(x.numerator) / x.denominator
            if isinstance(x, mpc):
                raise TypeError("complex value where a real one was expected")
            return mpfr(x)

    def complex(self, re, im=0) -> mpc:
        with self.active():
            if isinstance(re, (mpc, complex)) and im == 0:
                return mpc(re)
            return mpc(self.real(re), self.real(im))

    def convert(self, x) -> Scalar:
        """Like :meth:`real` but keeps complex inputs complex."""
        if isinstance(x, (mpc, complex)):
            return self.complex(x)
        return self.real(x)

    def eps(self):
        with self.active():
            return mpfr(2) ** (1 - self.bits)


def with_precision(bits: int) -> PrecisionCtx:
    return PrecisionCtx(bits)


def is_complex(x) -> bool:
    return isinstance(x, (mpc, complex))


def exact_ratio(x) -> Fraction:
    """Exact rational value of a finite real scalar."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    x = mpfr(x) if not isinstance(x, mpfr) else x
    if not gmpy2.is_finite(x):
        raise ValueError(f"non-finite value {x}")
    num, den = x.as_integer_ratio()
    return Fraction(int(num), int(den))


def _digits_truncated(q: Fraction, digits: int) -> tuple[int, int]:
    """Return (N, e) with N having exactly ``digits`` digits and
    N * 10**(e - digits + 1) <= q < (N+1) * 10**(e - digits + 1), for q > 0."""
    e = math.floor(math.log10(q.numerator) - math.log10(q.denominator))
    # the float estimate can be off by one near powers of ten
    while Fraction(10) ** e > q:
        e -= 1
    while Fraction(10) ** (e + 1) <= q:
        e += 1
    scaled = q / Fraction(10) ** (e - digits + 1)
    n = scaled.numerator // scaled.denominator
    return n, e


def _format(sign: str, n: int, e: int, digits: int) -> str:
    s = str(n)
    if abs(e) > 6:
        mant = s[0] + ("." + s[1:] if digits > 1 else "")
        return f"{sign}{mant}e{e:+d}"
    if e >= 0:
        if e + 1 >= digits:
            # integer with trailing zeros; keep a decimal point for the format
            return f"{sign}{s}{'0' * (e + 1 - digits)}."
        return f"{sign}{s[:e + 1]}.{s[e + 1:]}"
    return f"{sign}0.{'0' * (-e - 1)}{s}"


def _zero(digits: int) -> str:
    return "0." + "0" * (digits - 1) if digits > 1 else "0"


def truncate_decimal(x, digits: int) -> str:
    """Decimal string of ``x`` with exactly ``digits`` significant digits,
    truncated toward zero.

    Plain positional notation is used unless the decimal exponent exceeds 6 in
    magnitude, in which case the mantissa is written ``d.ddd`` with an ``e``
    suffix.
    """
    if digits < 1:
        raise ValueError("digits must be >= 1")
    q = exact_ratio(x)
    if q == 0:
        return _zero(digits)
    sign = "-" if q < 0 else ""
    n, e = _digits_truncated(abs(q), digits)
    return _format(sign, n, e, digits)


def round_decimal(x, digits: int) -> str:
    """Like :func:`truncate_decimal` but rounded to nearest (ties away from zero).

    This is the convention of the published 40-digit tables.
    """
    if digits < 1:
        raise ValueError("digits must be >= 1")
    q = exact_ratio(x)
    if q == 0:
        return _zero(digits)
    sign = "-" if q < 0 else ""
    n, e = _digits_truncated(abs(q), digits)
    rest = abs(q) / Fraction(10) ** (e - digits + 1) - n
    if rest >= Fraction(1, 2):
        n += 1
        if n == 10 ** digits:
            n //= 10
            e += 1
    return _format(sign, n, e, digits)


def table_decimal(x, digits: int, rounding: str = "round") -> str:
    """Table cell for ``x``: ``rounding`` is ``"round"`` or ``"truncate"``."""
    if rounding == "round":
        return round_decimal(x, digits)
    if rounding == "truncate":
        return truncate_decimal(x, digits)
    raise ValueError(f"unknown rounding {rounding!r}")


def to_decimal(x, digits: int | None = None) -> str:
    """Full-precision decimal serialisation (truncated at ``digits``, defaulting
    to the number of decimal digits the value's precision carries plus two)."""
    if digits is None:
        prec = x.precision if isinstance(x, mpfr) else 64
        digits = math.floor(prec * 0.30103) + 2
    return truncate_decimal(x, digits)
