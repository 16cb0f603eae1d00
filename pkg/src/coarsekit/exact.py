"""Exact numbers of the form ``r + q * (pi/2)`` with rational ``r`` and ``q``.

Spherical edge lengths are quarter turns, vertical edges of a coarsening
space have length 1, so every path length in the depth-0 models is such a
number.  Equality is decided on the two rational coordinates; ordering is
decided with a high precision evaluation, which is exact for all practical
purposes because ``pi`` is transcendental.
"""
from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational

import mpmath

with mpmath.workdps(60):
    _HALF_PI = +mpmath.pi / 2

QUARTER_TURN = math.pi / 2
# documented precision for comparisons mixing float lengths with exact ones
FLOAT_TOL = 1e-9


def as_fraction(value) -> Fraction:
    """Parse ints, Fractions and ``"num/den"`` strings into a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, Rational):
        return Fraction(value.numerator, value.denominator)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite value {value!r} is not rational")
        return Fraction(value).limit_denominator(10**12)
    raise TypeError(f"cannot interpret {value!r} as a rational")


class PiRational:
    """The exact length ``rational + quarter_turns * pi / 2``."""

    __slots__ = ("rational", "quarter_turns")

    def __init__(self, rational=0, quarter_turns=0):
        self.rational = as_fraction(rational)
        self.quarter_turns = as_fraction(quarter_turns)

    @classmethod
    def quarter(cls, k) -> "PiRational":
        return cls(0, k)

    def _coerce(self, other):
        if isinstance(other, PiRational):
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return PiRational(other, 0)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, float):
                return float(self) + other
            return NotImplemented
        return PiRational(self.rational + o.rational, self.quarter_turns + o.quarter_turns)

    __radd__ = __add__

    def __neg__(self):
        return PiRational(-self.rational, -self.quarter_turns)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, float):
                return float(self) - other
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return PiRational(self.rational * other, self.quarter_turns * other)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return PiRational(self.rational / other, self.quarter_turns / other)
        if isinstance(other, PiRational):
            # ratio of two lengths; exact when both lie on the same ray
            if other.rational == 0 and self.rational == 0 and other.quarter_turns:
                return self.quarter_turns / other.quarter_turns
            if other.quarter_turns == 0 and self.quarter_turns == 0 and other.rational:
                return self.rational / other.rational
            return float(self) / float(other)
        return NotImplemented

    def __float__(self):
        return float(self.rational) + float(self.quarter_turns) * QUARTER_TURN

    def sign(self) -> int:
        r, q = self.rational, self.quarter_turns
        if q == 0:
            return (r > 0) - (r < 0)
        if r == 0 or (r > 0) == (q > 0):
            return 1 if q > 0 else -1
        approx = float(r) + float(q) * QUARTER_TURN
        if abs(approx) > 1e-6 * (abs(float(r)) + 1.0):
            return 1 if approx > 0 else -1
        with mpmath.workdps(60):
            v = mpmath.mpf(r.numerator) / r.denominator + mpmath.mpf(q.numerator) / q.denominator * _HALF_PI
            return (v > 0) - (v < 0)

    def _cmp(self, other) -> int | None:
        if isinstance(other, float):
            if math.isinf(other):
                return -1 if other > 0 else 1
            a = float(self)
            return (a > other) - (a < other)
        o = self._coerce(other)
        if o is None:
            return None
        return (self - o).sign()

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, float):
                return self._cmp(other) == 0
            return NotImplemented
        return self.rational == o.rational and self.quarter_turns == o.quarter_turns

    def __hash__(self):
        if self.quarter_turns == 0:
            return hash(self.rational)
        return hash((self.rational, self.quarter_turns))

    def __lt__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c < 0

    def __le__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c <= 0

    def __gt__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c > 0

    def __ge__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c >= 0

    def __repr__(self):
        if self.rational == 0:
            return f"PiRational.quarter({self.quarter_turns})"
        return f"PiRational({self.rational}, {self.quarter_turns})"


def to_json(value):
    """Serialize exact lengths: Fractions as ``"num/den"``, quarter turns as a dict."""
    if isinstance(value, PiRational):
        if value.rational == 0:
            return {"quarter_turns": fraction_str(value.quarter_turns)}
        return {"rational": fraction_str(value.rational), "quarter_turns": fraction_str(value.quarter_turns)}
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, int):
        return fraction_str(Fraction(value))
    if isinstance(value, Fraction):
        return fraction_str(value)
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    return value


def from_json(value):
    if isinstance(value, dict) and "quarter_turns" in value:
        return PiRational(value.get("rational", 0), value["quarter_turns"])
    if value == "inf":
        return math.inf
    if isinstance(value, (str, int)):
        return as_fraction(value)
    return value


def fraction_str(q: Fraction) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"
