import gmpy2
import pytest

from riccati_pade.hankel import HankelSpec, assemble, determinant
from riccati_pade.numerics import PrecisionCtx, truncate_decimal
from riccati_pade.riccati_series import PotentialSpec, symmetric_coeffs
from riccati_pade.rootfind import (
    Bracket,
    newton_2d,
    newton_complex,
    refine_real,
    scan_real,
)

CTX = PrecisionCtx(256)


def test_scan_single_bracket():
    br = scan_real(lambda x: x * x - 1, CTX.real(0), CTX.real(2), 8)
    assert len(br) == 1
    assert br[0].lo <= 1 <= br[0].hi


def test_scan_three_roots():
    br = scan_real(lambda x: (x - 0.3) * (x - 1.1) * (x - 1.7), CTX.real(0), CTX.real(2), 40)
    assert len(br) == 3


def test_scan_skips_failures():
    def f(x):
        if abs(x - 1) < 0.05:
            raise ZeroDivisionError
        return x - 0.5
    notes = []
    br = scan_real(f, CTX.real(0), CTX.real(2), 20, warnings=notes)
    assert len(br) == 1


def test_bracket_validation():
    with pytest.raises(ValueError):
        Bracket(1, 0, -1, 1)
    with pytest.raises(ValueError):
        Bracket(0, 1, 1, 1)


def test_sqrt_two():
    tol = gmpy2.mpfr("1e-30")
    res = refine_real(lambda x: x * x - 2, Bracket(CTX.real(1), CTX.real(2), -1, 1), tol, CTX)
    assert res.converged
    assert truncate_decimal(res.value, 39) == "1.41421356237309504880168872420969807856"
    with CTX.active():
        assert abs(res.value - gmpy2.sqrt(CTX.real(2))) < gmpy2.mpfr("1e-29")


def test_linear_function_exact():
    res = refine_real(lambda x: 3 * x - 1, Bracket(CTX.real(0), CTX.real(1), -1, 1),
                      gmpy2.mpfr("1e-60"), CTX)
    with CTX.active():
        assert abs(res.value - CTX.real(1) / 3) < gmpy2.mpfr("1e-60")


def _critical_h2(g):
    pot = PotentialSpec(("-1", g))
    f = symmetric_coeffs(pot, 0, 0, 3, CTX)
    return determinant(assemble(f, HankelSpec(2, 0)), CTX)


def test_critical_table_first_row():
    brackets = scan_real(_critical_h2, CTX.real("0.01"), CTX.real("0.99"), 98)
    near = [b for b in brackets if b.lo <= 0.3637 <= b.hi]
    assert len(near) == 1
    res = refine_real(_critical_h2, near[0], gmpy2.mpfr("1e-50"), CTX)
    assert truncate_decimal(res.value, 40) == "0.3636964837266539687768291423593657530940"


def test_refine_stays_in_bracket():
    # steep function where an unguarded secant step would leave the bracket
    f = lambda x: gmpy2.atan(1000 * (x - CTX.real("0.3")))  # noqa: E731
    br = Bracket(CTX.real(0), CTX.real(1), -1, 1)
    res = refine_real(f, br, gmpy2.mpfr("1e-40"), CTX)
    assert br.lo <= res.value <= br.hi
    with CTX.active():
        assert abs(res.value - CTX.real("0.3")) < gmpy2.mpfr("1e-38")


def test_newton_complex_square():
    res = newton_complex(lambda z: z * z + 1, lambda z: 2 * z, CTX.complex("0.5", "0.8"),
                         gmpy2.mpfr("1e-60"), CTX)
    assert res.converged
    with CTX.active():
        assert abs(res.value - CTX.complex(0, 1)) < gmpy2.mpfr("1e-60")


def test_newton_complex_respects_basin():
    with CTX.active():
        target = gmpy2.exp(CTX.complex(0, 2) * gmpy2.const_pi() / 3)
        start = target + CTX.complex("0.05", "-0.03")
    res = newton_complex(lambda z: z ** 3 - 1, lambda z: 3 * z * z, start, gmpy2.mpfr("1e-60"), CTX)
    with CTX.active():
        assert abs(res.value - target) < gmpy2.mpfr("1e-55")


def test_newton_complex_finite_difference():
    res = newton_complex(lambda z: z * z + 1, None, CTX.complex("0.3", "1.2"), gmpy2.mpfr("1e-50"), CTX)
    with CTX.active():
        assert abs(res.value - CTX.complex(0, 1)) < gmpy2.mpfr("1e-45")


def test_newton_2d_linear_one_step():
    res = newton_2d(lambda x, y: (x - 1, y - 2), (CTX.real(5), CTX.real(-3)), gmpy2.mpfr("1e-60"), CTX,
                    jacobian=lambda x, y: ((1, 0), (0, 1)))
    assert res.converged
    assert res.value[0] == 1 and res.value[1] == 2
    assert res.iterations <= 2


def test_newton_2d_circle_line():
    F = lambda x, y: (x * x + y * y - 1, x - y)  # noqa: E731
    J = lambda x, y: ((2 * x, 2 * y), (1, -1))  # noqa: E731
    res = newton_2d(F, (CTX.real("0.6"), CTX.real("0.8")), gmpy2.mpfr("1e-60"), CTX, jacobian=J)
    with CTX.active():
        r = gmpy2.sqrt(CTX.real("0.5"))
        assert abs(res.value[0] - r) < gmpy2.mpfr("1e-60")
        assert abs(res.value[1] - r) < gmpy2.mpfr("1e-60")


def test_newton_2d_without_jacobian():
    F = lambda x, y: (x * x + y * y - 1, x - y)  # noqa: E731
    res = newton_2d(F, (CTX.real("0.6"), CTX.real("0.8")), gmpy2.mpfr("1e-50"), CTX)
    assert res.converged
    with CTX.active():
        assert abs(res.value[0] - gmpy2.sqrt(CTX.real("0.5"))) < gmpy2.mpfr("1e-45")


def test_newton_2d_no_real_root_is_not_converged():
    # x^2 + 1 = 0 has no real solution; iteration must stop unconverged
    F = lambda x, y: (x * x + 1, y)  # noqa: E731
    J = lambda x, y: ((2 * x, 0), (0, 1))  # noqa: E731
    res = newton_2d(F, (CTX.real("0.5"), CTX.real(0)), gmpy2.mpfr("1e-40"), CTX, jacobian=J, max_iter=60)
    assert not res.converged
