from fractions import Fraction

import gmpy2
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from riccati_pade.numerics import (
    PrecisionCtx,
    exact_ratio,
    round_decimal,
    table_decimal,
    to_decimal,
    truncate_decimal,
)


@pytest.mark.parametrize("bits,digits", [(192, 57), (512, 154)])
def test_decimal_digits(bits, digits):
    assert PrecisionCtx(bits).decimal_digits == digits


def test_precision_floor():
    with pytest.raises(ValueError):
        PrecisionCtx(100)


def test_truncate_table_cell():
    ctx = PrecisionCtx(256)
    x = ctx.real("0.30240487009486144401540519666992789671629")
    assert truncate_decimal(x, 40) == "0.3024048700948614440154051966699278967162"


def test_truncate_negative():
    ctx = PrecisionCtx(256)
    x = ctx.real("-43.779316566988995982322187288404756955719")
    assert truncate_decimal(x, 40) == "-43.77931656698899598232218728840475695571"


def test_truncate_one():
    assert truncate_decimal(1.0, 5) == "1.0000"


def test_round_versus_truncate():
    assert truncate_decimal("0.123456789", 5) == "0.12345"
    assert round_decimal("0.123456789", 5) == "0.12346"
    assert round_decimal("-0.123454", 5) == "-0.12345"


def test_round_carries_into_new_digit():
    assert round_decimal("9.99996", 5) == "10.000"
    assert round_decimal("0.0999996", 5) == "0.10000"


def test_zero_and_exponent_form():
    assert truncate_decimal(0, 4) == "0.000"
    assert truncate_decimal("1.5e-9", 3) == "1.50e-9"
    assert truncate_decimal("-2.25e12", 3) == "-2.25e+12"


def test_table_decimal_modes():
    assert table_decimal("2.71828", 3) == "2.72"
    assert table_decimal("2.71828", 3, "truncate") == "2.71"
    with pytest.raises(ValueError):
        table_decimal(1, 3, "banker")


def test_to_decimal_keeps_precision():
    ctx = PrecisionCtx(256)
    with ctx.active():
        third = ctx.real(1) / 3
    text = to_decimal(third)
    assert text.startswith("0." + "3" * 70)
    assert ctx.real(text) == third


def test_digits_must_be_positive():
    with pytest.raises(ValueError):
        truncate_decimal(1, 0)
    with pytest.raises(ValueError):
        round_decimal(1, 0)


_fractions = st.fractions(min_value=Fraction(-10**8), max_value=Fraction(10**8),
                          max_denominator=10**12).filter(lambda q: q != 0)


@settings(max_examples=200, deadline=None)
@given(_fractions, st.integers(min_value=1, max_value=30))
def test_truncation_brackets_value(q, digits):
    text = truncate_decimal(q, digits)
    t = Fraction(text)
    assert abs(t) <= abs(q)
    assert (t >= 0) == (q > 0) or t == 0
    mantissa = text.lstrip("-").split("e")[0].replace(".", "").strip("0")
    assert len(mantissa) <= digits
    # a prefix of a longer truncation equals the shorter truncation
    longer = truncate_decimal(q, digits + 5)
    assert Fraction(truncate_decimal(Fraction(longer), digits)) == t


@settings(max_examples=200, deadline=None)
@given(_fractions, st.integers(min_value=1, max_value=30))
def test_rounding_is_nearest(q, digits):
    r = Fraction(round_decimal(q, digits))
    t = Fraction(truncate_decimal(q, digits))
    assert abs(r - q) <= abs(r - t) + abs(q - t)
    assert abs(r - q) <= abs(t - q)


@settings(max_examples=100, deadline=None)
@given(st.floats(min_value=-1e6, max_value=1e6, allow_nan=False).filter(lambda v: v != 0))
def test_round_trip_through_mpfr(v):
    ctx = PrecisionCtx(256)
    x = ctx.real(v)
    assert exact_ratio(x) == Fraction(v)
    assert ctx.real(to_decimal(x)) == x


def test_exact_ratio_rejects_nonfinite():
    with pytest.raises(ValueError):
        exact_ratio(gmpy2.mpfr("inf"))
