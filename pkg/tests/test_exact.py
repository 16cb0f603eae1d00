import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from coarsekit.exact import PiRational, as_fraction, from_json, to_json

fractions = st.fractions(min_value=-50, max_value=50, max_denominator=12)


def test_as_fraction_inputs():
    assert as_fraction("3/4") == Fraction(3, 4)
    assert as_fraction(5) == 5
    with pytest.raises(TypeError):
        as_fraction(True)
    with pytest.raises(ValueError):
        as_fraction(math.inf)


def test_quarter_turn_arithmetic():
    a = PiRational.quarter(2)
    assert a == PiRational(0, 2)
    assert a + 1 == PiRational(1, 2)
    assert float(PiRational.quarter(1)) == pytest.approx(math.pi / 2)
    assert PiRational.quarter(1) > Fraction(3, 2)
    assert PiRational.quarter(1) < Fraction(8, 5)


@given(fractions, fractions, fractions, fractions)
def test_order_matches_floats(r1, q1, r2, q2):
    a, b = PiRational(r1, q1), PiRational(r2, q2)
    fa, fb = float(a), float(b)
    if abs(fa - fb) > 1e-9:
        assert (a < b) == (fa < fb)
    assert (a == b) == (r1 == r2 and q1 == q2)


@given(fractions, fractions)
def test_json_roundtrip(r, q):
    x = PiRational(r, q)
    assert from_json(to_json(x)) == x
    assert from_json(to_json(r)) == r


def test_inf_serialization():
    assert to_json(math.inf) == "inf"
    assert from_json("inf") == math.inf
