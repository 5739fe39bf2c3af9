import random
from itertools import permutations

import gmpy2
import pytest

from riccati_pade.hankel import (
    HankelSpec,
    SingularMatrixError,
    assemble,
    determinant,
    determinant_derivative,
    determinant_with_gradient,
)
from riccati_pade.numerics import PrecisionCtx

CTX = PrecisionCtx(256)


def cofactor(m):
    n = len(m)
    if n == 1:
        return m[0][0]
    total = 0
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        total += (-1) ** j * m[0][j] * cofactor(minor)
    return total


def test_spec_indices():
    spec = HankelSpec(D=3, d=1)
    assert (spec.max_index, spec.M, spec.N) == (6, 3, 2)
    with pytest.raises(ValueError):
        HankelSpec(D=0)
    with pytest.raises(ValueError):
        HankelSpec(D=2, d=-1)


def test_assemble_layout():
    f = list(range(10))
    assert assemble(f, HankelSpec(2, 0)) == [[1, 2], [2, 3]]
    assert assemble(f, HankelSpec(3, 1)) == [[2, 3, 4], [3, 4, 5], [4, 5, 6]]
    with pytest.raises(ValueError):
        assemble(f[:5], HankelSpec(3, 1))


def test_simple_determinants():
    ev = determinant([[1, 0, 0], [0, 1, 0], [0, 0, 1]], CTX)
    assert ev.value == 1 and ev.sign == 1
    ev = determinant([[1, 2], [2, 4]], CTX)
    assert ev.value == 0 and ev.sign == 0 and ev.is_zero
    assert determinant([[0, 1], [1, 0]], CTX).sign == -1


def test_lu_matches_cofactor_on_random_matrices():
    rng = random.Random(2024)
    bound = gmpy2.exp10(-CTX.decimal_digits + 8)
    with CTX.active():
        for _ in range(100):
            n = rng.randint(1, 4)
            m = [[CTX.real(rng.uniform(-5, 5)) for _ in range(n)] for _ in range(n)]
            exact = cofactor(m)
            lu = determinant(m, CTX).value
            scale = max(abs(exact), max(abs(x) for row in m for x in row) ** n * gmpy2.mpfr(1e-30))
            assert abs(lu - exact) <= bound * scale


def test_complex_determinant():
    with CTX.active():
        m = [[CTX.complex(1, 1), CTX.complex(2)], [CTX.complex(0, 3), CTX.complex(4, -1)]]
        ev = determinant(m, CTX)
        assert abs(ev.value - cofactor(m)) < gmpy2.mpfr(1e-70)
        assert abs(abs(ev.sign) - 1) < gmpy2.mpfr(1e-70)


def test_derivative_examples():
    with CTX.active():
        a, b = CTX.real(3), CTX.real(5)
        assert determinant_derivative([[a, 0], [0, b]], [[1, 0], [0, 0]], CTX) == b
        dm = [[CTX.real(x) for x in row] for row in ((1, 2, 3), (4, 5, 6), (7, 8, 10))]
        eye = [[CTX.real(int(i == j)) for j in range(3)] for i in range(3)]
        assert determinant_derivative(eye, dm, CTX) == 16


def test_gradient_matches_finite_difference():
    rng = random.Random(5)
    with CTX.active():
        A = [[CTX.real(rng.uniform(-1, 1)) for _ in range(4)] for _ in range(4)]
        B = [[CTX.real(rng.uniform(-1, 1)) for _ in range(4)] for _ in range(4)]
        h = gmpy2.exp2(-80)
        plus = determinant([[a + h * b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)], CTX).value
        minus = determinant([[a - h * b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)], CTX).value
        _, (g,) = determinant_with_gradient(A, [B], CTX)
        assert abs((plus - minus) / (2 * h) - g) < gmpy2.mpfr(1e-40)


def test_singular_derivative():
    with CTX.active():
        m = [[CTX.real(1), CTX.real(2)], [CTX.real(2), CTX.real(4)]]
        dm = [[CTX.real(1), CTX.real(0)], [CTX.real(0), CTX.real(0)]]
        with pytest.raises(SingularMatrixError):
            determinant_derivative(m, dm, CTX)
        ev, (g,) = determinant_with_gradient(m, [dm], CTX)
        # d/dt det([[1+t, 2], [2, 4]]) = 4
        assert ev.value == 0 and g == 4


def test_permutation_sign_consistent():
    base = [[CTX.real(v) for v in row] for row in ((2, 1, 0), (1, 3, 1), (0, 1, 4))]
    ref = determinant(base, CTX).value
    for perm in permutations(range(3)):
        rows = [base[i] for i in perm]
        inversions = sum(1 for i in range(3) for j in range(i + 1, 3) if perm[i] > perm[j])
        assert determinant(rows, CTX).value == (-1) ** inversions * ref
