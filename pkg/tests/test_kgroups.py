import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy import Matrix, ZZ
from sympy.matrices.normalforms import smith_normal_form as sympy_snf

from coarsekit.errors import PreconditionError
from coarsekit.kgroups import (
    FreeAbGroup,
    GroupHom,
    SubgroupBasis,
    discrete_mv_chain,
    exactness_check,
    hnf,
    image,
    kernel,
    quotient_invariants,
    s1_map,
    smith_normal_form,
    theorem317_report,
)

matrices = st.integers(1, 6).flatmap(
    lambda r: st.integers(1, 6).flatmap(
        lambda c: st.lists(st.lists(st.integers(-9, 9), min_size=c, max_size=c), min_size=r, max_size=r)
    )
)


def matmul(A, B):
    return [[sum(a * b for a, b in zip(row, col)) for col in zip(*B)] for row in A]


def diag_of(D):
    return [D[i][i] for i in range(min(len(D), len(D[0])))]


def hom(matrix, n=None):
    rows = len(matrix)
    cols = len(matrix[0]) if matrix else n
    return GroupHom(FreeAbGroup(tuple(range(cols))), FreeAbGroup(tuple(range(rows))), tuple(map(tuple, matrix)))


def test_snf_examples():
    assert diag_of(smith_normal_form([[0, 0], [0, 0]])[1]) == [0, 0]
    assert diag_of(smith_normal_form([[2, 0], [0, 3]])[1]) == [1, 6]


@settings(max_examples=200)
@given(matrices)
def test_snf_against_sympy(M):
    U, D, V = smith_normal_form(M)
    assert matmul(matmul(U, M), V) == D
    assert abs(Matrix(U).det()) == 1 and abs(Matrix(V).det()) == 1
    d = diag_of(D)
    assert all(x >= 0 for x in d)
    for a, b in zip(d, d[1:]):
        assert (b == 0) if a == 0 else b % a == 0
    assert all(D[i][j] == 0 for i in range(len(D)) for j in range(len(D[0])) if i != j)
    oracle = sympy_snf(Matrix(M), domain=ZZ)
    assert sorted(abs(x) for x in diag_of(oracle.tolist())) == sorted(d)


def test_hnf_is_canonical():
    a = hnf([[2, 4], [1, 1]], 2)
    b = hnf([[1, 1], [0, 2], [3, 5]], 2)
    assert a == b


def test_kernel_and_image_examples():
    ident = hom([[1, 0], [0, 1]])
    assert kernel(ident).dim == 0 and image(ident).dim == 2
    summation = hom([[1, 1, 1, 1]])
    assert kernel(summation).dim == 3


@settings(max_examples=100)
@given(matrices)
def test_rank_nullity(M):
    h = hom(M)
    K = kernel(h)
    assert K.dim + image(h).dim == h.source.rank
    for v in K.rows:
        assert all(x == 0 for x in h(v))


def test_quotients():
    assert quotient_invariants(3, SubgroupBasis(3, ()))["free_rank"] == 3
    q = quotient_invariants(2, SubgroupBasis.generated_by(2, [[2, 0]]))
    assert q["free_rank"] == 1 and q["torsion"] == [2]
    sum_zero = SubgroupBasis.generated_by(4, [[1, -1, 0, 0], [0, 1, -1, 0], [0, 0, 1, -1]])
    assert quotient_invariants(4, sum_zero)["pretty"] == "Z"


def test_s1_examples():
    X = ("a", "b", "c", "d")
    h, rep = s1_map(X, {"a"}, {"a"})
    assert [list(r) for r in h.matrix] == [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]
    h, rep = s1_map(X, {"a"}, {"a", "b"})
    assert h.target.rank == 3 and h.source.rank == 4
    assert rep["kernel_rank"] == 1 and rep["surjective"] and rep["kernel_matches_description"]
    with pytest.raises(PreconditionError):
        s1_map(X, {"a", "b"}, {"a"})
    with pytest.raises(PreconditionError):
        s1_map(X, set(), {"a"})


def test_s1_maps_compose_like_the_direct_map():
    X = tuple(range(6))
    chain = [{0}, {0, 1}, {0, 1, 2, 3}]
    h1, _ = s1_map(X, chain[0], chain[1])
    h2, _ = s1_map(X, chain[1], chain[2])
    direct, _ = s1_map(X, chain[0], chain[2])
    assert h1.then(h2).matrix == direct.matrix


def test_theorem317_examples():
    rep = theorem317_report((0,), [{0}])
    assert rep["quotient"]["pretty"] == "Z" and rep["kernels_equal"]
    rep = theorem317_report(tuple(range(5)), [{0}, {0, 1, 2}, set(range(5))])
    assert rep["kernels_equal"] and rep["quotient"]["pretty"] == "Z"
    rep = theorem317_report(tuple(range(6)), [{0, 1, 2}])
    assert rep["quotient"]["free_rank"] == 4 and rep["quotient_matches"]
    with pytest.raises(PreconditionError):
        theorem317_report(tuple(range(3)), [{0, 1}, {0}])


def test_exactness_examples():
    zero_in = GroupHom(FreeAbGroup(()), FreeAbGroup((0,)), ((),))
    ident = hom([[1]])
    zero_out = GroupHom(FreeAbGroup((0,)), FreeAbGroup(()), ())
    assert exactness_check([zero_in, ident, zero_out])["exact"]
    # 0 -> Z -(x2)-> Z -> Z/2 -> 0, with Z/2 presented by <2>
    double = hom([[2]])
    proj = hom([[1]])
    to_zero = GroupHom(FreeAbGroup((0,)), FreeAbGroup(()), ())
    rels = [None, None, None, SubgroupBasis.generated_by(1, [[2]]), None]
    assert exactness_check([zero_in, double, proj, to_zero], rels)["exact"]
    broken = exactness_check([zero_in, double, hom([[2]]), to_zero], rels)
    assert not broken["exact"]
    assert any(n["witness"] for n in broken["nodes"])


@settings(max_examples=60)
@given(st.sets(st.integers(0, 7)), st.sets(st.integers(0, 7)))
def test_mayer_vietoris_is_exact(Y, Z):
    assert exactness_check(discrete_mv_chain(Y, Z))["exact"]


def test_theorem317_small_exhaustive():
    X = tuple(range(4))
    subsets = [frozenset(s) for r in range(1, 5) for s in itertools.combinations(X, r)]
    cache = {}
    for a, b in itertools.product(subsets, repeat=2):
        if a < b:
            rep = theorem317_report(X, [a, b], cache)
            assert rep["s1_all_surjective"] and rep["s1_kernels_match"]
            assert rep["kernels_equal"] and rep["quotient_matches"]
