import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coarsekit.coarse import PointMap
from coarsekit.errors import PreconditionError
from coarsekit.roe import (
    FiniteOperator,
    NormLowerBound,
    block_swindle,
    conjugate,
    covering_isometry,
    opnorm,
    propagation,
    split_along,
    support,
    swindle_rotation,
    truncate,
)
from coarsekit.spaces import FilteredMetricSpace

from helpers import random_line_space, random_operator_entries

Z6 = FilteredMetricSpace.integer_interval(0, 5)


def op(entries, space=Z6, m=1):
    return FiniteOperator.on(space, m, entries)


def brute_propagation(T):
    return max((abs(T.source.points[c // T.m_source] - T.target.points[r // T.m_target]) for r, c in T.entries), default=0)


def test_support_and_propagation():
    assert support(op({})) == frozenset()
    diag = op({(k, k): k + 1 for k in range(6)})
    assert all(x == y for x, y in support(diag))
    assert propagation(diag) == 0
    one = op({(4, 1): 2})
    assert support(one) == {(1, 4)}
    assert propagation(one) == 3


@settings(max_examples=50)
@given(st.integers(0, 10_000))
def test_propagation_matches_brute_force(seed):
    rng = random.Random(seed)
    T = op(random_operator_entries(rng, 6, 6, 0.3))
    assert propagation(T) == brute_propagation(T)


def test_truncation_edges():
    T = op({(0, 1): 1, (3, 3): 2})
    assert truncate(T, Z6.points) == T
    assert truncate(T, []).is_zero()


def test_split_along_half_lines():
    Z = FilteredMetricSpace.integer_interval(-10, 10)
    items = [(y, 0, x, 0, 1) for x in Z.points for y in Z.points if abs(x - y) <= 2]
    T = FiniteOperator.from_labels(Z, 1, items)
    TY, TZ, rep = split_along(T, [p for p in Z.points if p >= 0], [p for p in Z.points if p <= 0])
    assert rep["reassembles"] and TY + TZ == T
    assert rep["propagation"] == "2/1"


def test_split_along_diagonal_partition():
    T = op({(k, k): 1 for k in range(6)})
    TY, TZ, rep = split_along(T, [0, 1, 2], [3, 4, 5])
    assert set(TY.entries) == {(0, 0), (1, 1), (2, 2)}
    assert set(TZ.entries) == {(3, 3), (4, 4), (5, 5)}


def test_norms_examples():
    I = FiniteOperator.identity(Z6, 2)
    assert opnorm(I, 1) == 1 and opnorm(I, 2) == 1
    assert float(opnorm(I, 3)) == pytest.approx(1)
    assert isinstance(opnorm(I, 3), NormLowerBound)
    assert opnorm(op({(0, 0): 2, (1, 1): 3}), 1) == 3
    ones = op({(0, 0): 1, (0, 1): 1, (1, 0): 1, (1, 1): 1})
    n2 = opnorm(ones, 2)
    assert n2 == 2 and n2.exact_value() == 2
    assert opnorm(op({(0, 0): 1, (0, 1): 1}), 2) > Fraction(141, 100)
    assert opnorm(op({(0, 0): 1, (0, 1): 1}), 2) < Fraction(142, 100)


@settings(max_examples=40)
@given(st.integers(0, 10_000))
def test_norm2_agrees_with_svd(seed):
    rng = random.Random(seed)
    T = op(random_operator_entries(rng, 6, 6, 0.3))
    n2 = opnorm(T, 2)
    svd = np.linalg.norm(np.array(T.dense(), dtype=float), 2)
    assert float(n2) == pytest.approx(svd, abs=1e-9)
    q = Fraction(svd).limit_denominator(1000)
    if abs(float(q) - svd) > 1e-6:
        assert (n2 <= q) == (svd <= float(q))


@settings(max_examples=40)
@given(st.integers(0, 10_000))
def test_truncation_does_not_increase_norms(seed):
    rng = random.Random(seed)
    T = op(random_operator_entries(rng, 6, 6, 0.4))
    Y = rng.sample(Z6.points, rng.randint(0, 6))
    TY = truncate(T, Y)
    assert opnorm(TY, 1) <= opnorm(T, 1)
    assert opnorm(TY, 2) <= opnorm(T, 2)


def test_covering_isometry_identity():
    pair = covering_isometry(PointMap.identity(Z6), 1)
    I = FiniteOperator.identity(Z6, 1)
    assert pair.V == I and pair.Vplus == I
    T = op({(0, 2): 1, (5, 5): 3})
    A, rep = conjugate(pair, T)
    assert A == T and rep["holds"]


def test_covering_isometry_constant_map():
    three = FilteredMetricSpace.integer_interval(0, 2)
    f = PointMap(three, three, (0, 0, 0))
    pair = covering_isometry(f, 1, 3)
    assert pair.V.m_target == 3
    assert pair.Vplus @ pair.V == FiniteOperator.identity(three, 1)
    with pytest.raises(PreconditionError):
        covering_isometry(f, 1, 2)


@settings(max_examples=20)
@given(st.integers(0, 10_000))
def test_covering_isometry_random(seed):
    rng = random.Random(seed)
    sp = random_line_space(rng, 20)
    f = PointMap(sp, sp, tuple(rng.randrange(20) for _ in range(20)))
    pair = covering_isometry(f, rng.randint(1, 2))
    assert all(pair.report().values())


def test_conjugation_along_an_isometry_keeps_propagation():
    Z = FilteredMetricSpace.integer_interval(0, 9)
    shift = PointMap(Z, Z, tuple((x + 3) % 10 for x in range(10)))
    T = FiniteOperator.on(Z, 1, {(1, 2): 1, (4, 3): 1})
    A, rep = conjugate(covering_isometry(shift, 1), T)
    assert propagation(A) == propagation(T) and rep["holds"]


def test_swindle_rotation_identity_pairs():
    pair = covering_isometry(PointMap.identity(Z6), 1)
    U, Up, rep = swindle_rotation(pair, pair)
    assert all(rep.values())
    assert U == FiniteOperator.identity(Z6, 2)


def test_swindle_rotation_two_injections():
    two = FilteredMetricSpace.integer_interval(0, 1)
    four = FilteredMetricSpace.integer_interval(0, 3)
    a = covering_isometry(PointMap(two, four, (0, 1)), 1, 1)
    b = covering_isometry(PointMap(two, four, (2, 3)), 1, 1)
    _, _, rep = swindle_rotation(a, b)
    assert all(rep.values())


def test_block_swindle():
    pair = covering_isometry(PointMap.identity(Z6), 1)
    T = op({(0, 1): 1, (2, 2): -1})
    bs = block_swindle(T, [pair, pair], 2)
    assert bs.report["conjugation_identity"]
    Z = FilteredMetricSpace.integer_interval(0, 5)
    shifts = [covering_isometry(PointMap(Z, Z, tuple(min(5, x + k) for x in range(6))), 1, 6) for k in range(3)]
    T = FiniteOperator.on(Z, 1, {(0, 0): 1, (1, 2): 2})
    bs = block_swindle(T, shifts, 3)
    assert bs.report["conjugation_identity"] and bs.report["blocks_checked"] == 2
