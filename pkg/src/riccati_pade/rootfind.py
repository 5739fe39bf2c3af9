"""Root location and refinement for determinant-valued functions.

Real roots are bracketed by scanning signs (never magnitudes, so values such as
``1e-5000`` are harmless) and refined by bisection followed by a safeguarded
secant iteration.  Complex roots use damped Newton; the two-dimensional
well-centred problem uses damped Newton with oscillation detection.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import gmpy2
from gmpy2 import mpfr

from .numerics import PrecisionCtx

log = logging.getLogger(__name__)

__all__ = [
    "Bracket",
    "RootResult",
    "ConvergenceError",
    "scan_real",
    "refine_real",
    "newton_complex",
    "newton_2d",
    "sign_of",
]


class ConvergenceError(ArithmeticError):
    """Newton iteration diverged or hit a singular derivative."""


@dataclass(frozen=True)
class Bracket:
    lo: object
    hi: object
    f_lo_sign: int
    f_hi_sign: int

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError("bracket needs lo < hi")
        if self.f_lo_sign * self.f_hi_sign >= 0 and not (self.f_lo_sign == 0 or self.f_hi_sign == 0):
            raise ValueError("bracket end signs must differ")

    @property
    def mid(self):
        return (self.lo + self.hi) / 2

    @property
    def width(self):
        return self.hi - self.lo


@dataclass
class RootResult:
    value: object
    residual: object
    iterations: int
    converged: bool
    precision_used: int
    oscillation: bool = False
    bracket: Optional[Bracket] = None
    notes: list = field(default_factory=list)


def sign_of(v) -> int:
    """Sign of a real scalar or of anything with a ``sign`` attribute."""
    s = getattr(v, "sign", None)
    if s is not None:
        return int(s)
    if v > 0:
        return 1
    if v < 0:
        return -1
    return 0


def _safe_sign(f, x):
    try:
        v = f(x)
    except (OverflowError, ZeroDivisionError, ValueError) as exc:
        log.debug("evaluation failed at %s: %s", x, exc)
        return None
    if getattr(v, "sign", None) is None:
        if isinstance(v, mpfr) and not gmpy2.is_finite(v):
            return None
    return sign_of(v)


def scan_real(f: Callable, lo, hi, steps: int, *, geometric: bool = False,
              warnings: Optional[list] = None) -> list[Bracket]:
    """Sign-change intervals of ``f`` on a uniform (or geometric) grid.

    ``f`` may return a real scalar or an object with a ``sign`` attribute
    (e.g. :class:`~riccati_pade.hankel.HankelEval`).  A grid point where ``f``
    fails is replaced by a subdivision of its neighbouring cells; if that
    also fails the cells are skipped and a note is appended to ``warnings``.
    An exact zero at a grid point yields a degenerate bracket around it.
    """
    if not lo < hi:
        raise ValueError("scan_real needs lo < hi")
    if steps < 2:
        raise ValueError("steps must be >= 2")
    if geometric:
        if lo <= 0:
            raise ValueError("geometric scan needs lo > 0")
        ratio = (hi / lo) ** (mpfr(1) / steps) if isinstance(lo, mpfr) else (hi / lo) ** (1.0 / steps)
        xs = [lo * ratio ** i for i in range(steps)] + [hi]
    else:
        xs = [lo + (hi - lo) * i / steps for i in range(steps)] + [hi]
    signs = [_safe_sign(f, x) for x in xs]
    out: list[Bracket] = []
    prev_x, prev_s = None, None
    i = 0
    while i < len(xs):
        x, s = xs[i], signs[i]
        if s is None:
            # subdivide the two adjacent cells once
            left = xs[i - 1] if i > 0 else x
            right = xs[i + 1] if i + 1 < len(xs) else x
            alt = [(left + x) / 2, (x + right) / 2]
            alt_s = [_safe_sign(f, a) for a in alt]
            if all(a is None for a in alt_s):
                if warnings is not None:
                    warnings.append(f"non-finite value near {x}; cell skipped")
                log.warning("scan_real: skipping cell around %s", x)
                prev_x, prev_s = None, None
                i += 1
                continue
            for a, sa in zip(alt, alt_s):
                if sa is None:
                    continue
                if prev_s is not None and prev_s * sa < 0:
                    out.append(Bracket(prev_x, a, prev_s, sa))
                prev_x, prev_s = a, sa
            i += 1
            continue
        if s == 0:
            # exact zero: report a tight bracket around the grid point
            w = (xs[min(i + 1, len(xs) - 1)] - xs[max(i - 1, 0)]) / 1000 or abs(x) * 1e-30
            out.append(Bracket(x - w, x + w, 0, 0))
            prev_x, prev_s = None, None
            i += 1
            continue
        if prev_s is not None and prev_s * s < 0:
            out.append(Bracket(prev_x, x, prev_s, s))
        prev_x, prev_s = x, s
        i += 1
    return out


def _value_of(v):
    return getattr(v, "value", v)


# relative bracket width at which bisection hands over to the secant phase
_SECANT_SWITCH = 1e-6


def _refine_real(f: Callable, bracket: Bracket, tol, ctx: Optional[PrecisionCtx] = None,
                max_iter: Optional[int] = None) -> RootResult:
    digits = ctx.decimal_digits if ctx is not None else 60
    max_iter = max_iter or 10 * digits
    bits = ctx.bits if ctx is not None else None
    a, b = bracket.lo, bracket.hi
    if bracket.f_lo_sign == 0 and bracket.f_hi_sign == 0:
        # the bracket was produced around an exact zero
        mid = bracket.mid
        return RootResult(mid, 0, 0, True, bits, bracket=bracket)
    fa = _value_of(f(a))
    fb = _value_of(f(b))
    if fa == 0:
        return RootResult(a, 0, 0, True, bits, bracket=bracket)
    if fb == 0:
        return RootResult(b, 0, 0, True, bits, bracket=bracket)
    if (fa > 0) == (fb > 0):
        raise ValueError("function has the same sign at both bracket ends")
    it = 0
    # bisection phase
    while it < max_iter:
        mid = (a + b) / 2
        if b - a <= max(1000 * tol, _SECANT_SWITCH) * abs(mid):
            break
        fm = _value_of(f(mid))
        it += 1
        if fm == 0:
            return RootResult(mid, 0, it, True, bits, bracket=Bracket(a, b, sign_of(fa), sign_of(fb)))
        if (fm > 0) == (fa > 0):
            a, fa = mid, fm
        else:
            b, fb = mid, fm
    # Illinois phase
    side = 0
    converged = False
    x = (a + b) / 2
    while it < max_iter:
        if b - a <= tol * abs((a + b) / 2):
            converged = True
            break
        x = b - fb * (b - a) / (fb - fa)
        if not (a < x < b):
            x = (a + b) / 2
        fx = _value_of(f(x))
        it += 1
        if fx == 0:
            a = b = x
            converged = True
            break
        if (fx > 0) == (fb > 0):
            b, fb = x, fx
            if side == -1:
                fa = fa / 2
            side = -1
        else:
            a, fa = x, fx
            if side == 1:
                fb = fb / 2
            side = 1
        # guard against stagnation on one side
        if it % 8 == 0:
            mid = (a + b) / 2
            fm = _value_of(f(mid))
            it += 1
            if fm == 0:
                a = b = mid
                converged = True
                break
            if (fm > 0) == (fa > 0):
                a, fa = mid, fm
            else:
                b, fb = mid, fm
    root = (a + b) / 2 if a != b else a
    residual = min(abs(fa), abs(fb)) if a != b else 0
    res = RootResult(root, residual, it, converged, bits)
    if a != b:
        res.bracket = Bracket(a, b, sign_of(fa), sign_of(fb))
    else:
        res.bracket = None
    if not converged:
        res.notes.append(f"no convergence after {it} iterations; bracket width {b - a}")
    return res


def _fd_derivative(f, z, h):
    return (f(z + h) - f(z - h)) / (2 * h)


def _newton_complex(f: Callable, df: Optional[Callable], start, tol,
                   ctx: Optional[PrecisionCtx] = None, max_iter: int = 200,
                   fd_step=None) -> RootResult:
    bits = ctx.bits if ctx is not None else 256
    z = start
    joint = df == "joint"

    def evaluate(z):
        if joint:
            return f(z)
        v = f(z)
        if df is not None:
            return v, df(z)
        h = fd_step if fd_step is not None else mpfr(2) ** (-bits // 3) * max(1, abs(z))
        return v, _fd_derivative(f, z, h)

    fz, dfz = evaluate(z)
    growing = 0
    last_step = None
    for it in range(1, max_iter + 1):
        if dfz == 0:
            raise ConvergenceError("zero derivative in Newton iteration")
        step = fz / dfz
        lam = 1
        for _ in range(30):
            z_new = z - lam * step
            f_new, df_new = evaluate(z_new)
            if abs(f_new) < abs(fz) or abs(lam * step) <= tol * abs(z_new):
                break
            lam = lam / 2
        else:
            # no decrease possible: we are sitting on the noise floor
            return RootResult(z, abs(fz), it, abs(step) <= 1e3 * tol * abs(z) if z else False, bits,
                              notes=["line search exhausted"])
        taken = abs(lam * step)
        if last_step is not None and taken > last_step:
            growing += 1
            if growing >= 5:
                raise ConvergenceError("Newton steps grew for 5 consecutive iterations")
        else:
            growing = 0
        last_step = taken
        z, fz, dfz = z_new, f_new, df_new
        if taken <= tol * abs(z):
            return RootResult(z, abs(fz), it, True, bits)
    return RootResult(z, abs(fz), max_iter, False, bits, notes=["iteration limit"])


# iterates kept for the bounded-without-convergence test, and its relative spread
_TAIL = 20
_BOUNDED_SPREAD = 1e-8


def _solve2(j, r):
    (a, b), (c, d) = j
    det = a * d - b * c
    if det == 0:
        raise ConvergenceError("singular Jacobian")
    return ((d * r[0] - b * r[1]) / det, (a * r[1] - c * r[0]) / det)


def _newton_2d(F: Callable, start: Sequence, tol, ctx: Optional[PrecisionCtx] = None,
              jacobian: Optional[Callable] = None, max_iter: int = 100,
              damped: bool = True, history: int = 6) -> RootResult:
    bits = ctx.bits if ctx is not None else 256
    joint = jacobian == "joint"
    h_rel = mpfr(2) ** (-bits // 3)

    def evaluate(x, y):
        if joint:
            return F(x, y)
        r = F(x, y)
        if jacobian is not None:
            return r, jacobian(x, y)
        hx = h_rel * max(1, abs(x))
        hy = h_rel * max(1, abs(y))
        rx = F(x + hx, y)
        ry = F(x, y + hy)
        return r, ((
            (rx[0] - r[0]) / hx, (ry[0] - r[0]) / hy), (
            (rx[1] - r[1]) / hx, (ry[1] - r[1]) / hy))

    def norm(r):
        return max(abs(r[0]), abs(r[1]))

    x, y = start
    r, J = evaluate(x, y)
    iterates = [(x, y, norm(r))]
    tail = list(iterates)
    for it in range(1, max_iter + 1):
        dx, dy = _solve2(J, r)
        full = max(abs(dx), abs(dy))
        lam = 1
        x_new, y_new = x - dx, y - dy
        r_new, J_new = evaluate(x_new, y_new)
        if damped and full > tol * max(abs(x), abs(y), 1):
            # natural monotonicity test: the simplified correction J(x)^-1 F(x_new)
            # must shrink; unlike |F| this is blind to the scaling of the equations
            for _ in range(20):
                sx, sy = _solve2(J, r_new)
                if max(abs(sx), abs(sy)) <= (1 - lam / 4) * full:
                    break
                lam = lam / 2
                x_new, y_new = x - lam * dx, y - lam * dy
                r_new, J_new = evaluate(x_new, y_new)
        step = lam * full
        x, y, r, J = x_new, y_new, r_new, J_new
        scale = max(abs(x), abs(y), 1)
        if step <= tol * scale:
            return RootResult((x, y), norm(r), it, True, bits)
        cur = norm(r)
        for (px, py, pres) in iterates[:-1]:
            close = max(abs(px - x), abs(py - y)) < 10 * tol * scale
            if close and not cur < pres / 2:
                return RootResult((x, y), cur, it, False, bits, oscillation=True,
                                  notes=["iterates revisit a previous point without residual decrease"])
        iterates.append((x, y, cur))
        if len(iterates) > history:
            iterates.pop(0)
        tail.append((x, y, cur))
        if len(tail) > _TAIL:
            tail.pop(0)
    # no convergence: iterates that keep circling a small region (rather than
    # drifting away) are the other face of oscillation
    scale = max(abs(x), abs(y), 1)
    spread = max(max(abs(a[0] - b[0]), abs(a[1] - b[1])) for a in tail for b in tail)
    bx, by, bres = min(tail, key=lambda t: t[2])
    if spread <= _BOUNDED_SPREAD * scale:
        return RootResult((bx, by), bres, max_iter, False, bits, oscillation=True,
                          notes=[f"iterates stay within {float(spread / scale):.1e} (relative) "
                                 f"without converging after {max_iter} iterations"])
    return RootResult((x, y), norm(r), max_iter, False, bits,
                      notes=[f"iteration limit {max_iter} reached"])


_DEFAULT_CTX = PrecisionCtx(256)


def refine_real(f: Callable, bracket: Bracket, tol, ctx: Optional[PrecisionCtx] = None,
                max_iter: Optional[int] = None) -> RootResult:
    """Refine a root inside ``bracket`` to relative tolerance ``tol``.

    Bisection shrinks the bracket to a relative width of ``1e-6`` (or
    ``1e3 * tol`` if that is larger); a secant step
    (Illinois-modified regula falsi, which never leaves the bracket) then
    polishes it.  ``f`` returns a real scalar or a HankelEval.  The iteration's
    own arithmetic runs at ``ctx`` precision.
    """
    ctx = ctx or _DEFAULT_CTX
    with ctx.active():
        return _refine_real(f, bracket, tol, ctx, max_iter)


def newton_complex(f: Callable, df, start, tol, ctx: Optional[PrecisionCtx] = None,
                   max_iter: int = 200, fd_step=None) -> RootResult:
    """Damped Newton iteration for an analytic function of one complex variable.

    The step is halved until ``|f|`` decreases.  ``df`` may be ``None`` (central
    difference with step ``2^(-bits/3) * max(1, |z|)``), a callable, or the
    string ``"joint"`` meaning ``f`` itself returns ``(value, derivative)``.
    Raises :class:`ConvergenceError` when the step grows for 5 consecutive
    iterations or the derivative vanishes.
    """
    ctx = ctx or _DEFAULT_CTX
    with ctx.active():
        return _newton_complex(f, df, start, tol, ctx, max_iter, fd_step)


def newton_2d(F: Callable, start: Sequence, tol, ctx: Optional[PrecisionCtx] = None,
              jacobian=None, max_iter: int = 100, damped: bool = True,
              history: int = 6) -> RootResult:
    """Newton iteration for two equations in two unknowns.

    ``F(x, y)`` returns a pair of residuals; ``jacobian(x, y)`` returns
    ``((dF1/dx, dF1/dy), (dF2/dx, dF2/dy))``, or ``F`` returns
    ``(residuals, jacobian)`` when ``jacobian == "joint"``.  Without either a
    forward-difference Jacobian with relative step ``2^(-bits/3)`` is used.

    With ``damped`` the step is halved until the simplified Newton correction
    at the trial point is smaller than the full correction (an affine-invariant
    test, so wildly different magnitudes of the two equations do not matter).

    The last ``history`` iterates are kept; if two of them come within
    ``10 * tol * |value|`` of each other while the residual has not halved,
    the run is classified as oscillatory and returned unconverged with
    ``oscillation=True``.  The same flag is raised when the iteration limit is
    reached while the last 20 iterates stay within a relative spread of
    ``1e-8``; the iterate with the smallest residual is then returned.
    """
    ctx = ctx or _DEFAULT_CTX
    with ctx.active():
        return _newton_2d(F, start, tol, ctx, jacobian, max_iter, damped, history)
