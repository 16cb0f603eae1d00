"""Integer linear algebra for finitely generated abelian groups.

Matrices are lists of rows of Python ints and act on column vectors.  A
subgroup of ``Z^n`` is stored by the rows of its Hermite normal form, which
is unique, so equality of subgroups is equality of those rows.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Iterable, Sequence

from .errors import MalformedInputError, PreconditionError

__all__ = [
    "FreeAbGroup",
    "GroupHom",
    "SubgroupBasis",
    "smith_normal_form",
    "hnf",
    "kernel",
    "image",
    "quotient_invariants",
    "s1_map",
    "theorem317_report",
    "exactness_check",
    "discrete_mv_chain",
]


def _identity(n: int) -> list:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def _matmul(A: list, B: list, inner: int | None = None) -> list:
    if inner is None:
        inner = len(B)
    cols = len(B[0]) if B else 0
    return [[sum(A[i][k] * B[k][j] for k in range(inner)) for j in range(cols)] for i in range(len(A))]


def smith_normal_form(M: Sequence[Sequence[int]]) -> tuple:
    """``(U, D, V)`` with ``U M V = D`` diagonal, ``d_1 | d_2 | ...``, and U, V unimodular."""
    m = len(M)
    n = len(M[0]) if m else 0
    D = [list(map(int, row)) for row in M]
    U = _identity(m)
    V = _identity(n)

    def swap_rows(i, j):
        D[i], D[j] = D[j], D[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in D:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    def add_row(dst, src, q):  # row_dst -= q * row_src
        D[dst] = [a - q * b for a, b in zip(D[dst], D[src])]
        U[dst] = [a - q * b for a, b in zip(U[dst], U[src])]

    def add_col(dst, src, q):  # col_dst -= q * col_src
        for row in D:
            row[dst] -= q * row[src]
        for row in V:
            row[dst] -= q * row[src]

    t = 0
    while t < min(m, n):
        nz = [(abs(D[i][j]), i, j) for i in range(t, m) for j in range(t, n) if D[i][j]]
        if not nz:
            break
        _, i, j = min(nz)
        swap_rows(t, i)
        swap_cols(t, j)
        while True:
            # the smallest entry of row t and column t becomes the pivot
            cand = [(abs(D[i][t]), i, t) for i in range(t, m) if D[i][t]]
            cand += [(abs(D[t][j]), t, j) for j in range(t + 1, n) if D[t][j]]
            _, i, j = min(cand)
            swap_rows(t, i)
            swap_cols(t, j)
            for i in range(t + 1, m):
                if D[i][t]:
                    add_row(i, t, D[i][t] // D[t][t])
            for j in range(t + 1, n):
                if D[t][j]:
                    add_col(j, t, D[t][j] // D[t][t])
            if any(D[i][t] for i in range(t + 1, m)) or any(D[t][j] for j in range(t + 1, n)):
                continue
            bad = next(((i, j) for i in range(t + 1, m) for j in range(t + 1, n) if D[i][j] % D[t][t]), None)
            if bad is None:
                break
            # fold the offending row into the pivot row and reduce again
            D[t] = [a + b for a, b in zip(D[t], D[bad[0]])]
            U[t] = [a + b for a, b in zip(U[t], U[bad[0]])]
        if D[t][t] < 0:
            D[t] = [-a for a in D[t]]
            U[t] = [-a for a in U[t]]
        t += 1
    return U, D, V


def hnf(rows: Iterable[Sequence[int]], ncols: int) -> tuple:
    """Row Hermite normal form of the lattice spanned by ``rows``; zero rows dropped."""
    A = [list(map(int, r)) for r in rows if any(r)]
    col = 0
    r0 = 0
    while r0 < len(A) and col < ncols:
        piv = [i for i in range(r0, len(A)) if A[i][col]]
        if not piv:
            col += 1
            continue
        while len(piv) > 1:
            k = min(piv, key=lambda i: abs(A[i][col]))
            for i in piv:
                if i != k:
                    q = A[i][col] // A[k][col]
                    A[i] = [a - q * b for a, b in zip(A[i], A[k])]
            piv = [i for i in range(r0, len(A)) if A[i][col]]
        k = piv[0]
        A[r0], A[k] = A[k], A[r0]
        if A[r0][col] < 0:
            A[r0] = [-a for a in A[r0]]
        p = A[r0][col]
        for i in range(r0):
            q = A[i][col] // p
            if q:
                A[i] = [a - q * b for a, b in zip(A[i], A[r0])]
        r0 += 1
        col += 1
    return tuple(tuple(r) for r in A[:r0])


@dataclass(frozen=True)
class FreeAbGroup:
    labels: tuple

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        if len(set(self.labels)) != len(self.labels):
            raise MalformedInputError("basis labels must be distinct")

    @property
    def rank(self) -> int:
        return len(self.labels)


@dataclass(frozen=True)
class SubgroupBasis:
    """A subgroup of ``Z^rank`` by the rows of its Hermite normal form."""

    rank: int
    rows: tuple

    @classmethod
    def generated_by(cls, rank: int, gens: Iterable[Sequence[int]]) -> "SubgroupBasis":
        gens = [tuple(g) for g in gens]
        if any(len(g) != rank for g in gens):
            raise MalformedInputError("generator length does not match the ambient rank")
        return cls(rank, hnf(gens, rank))

    def __add__(self, other: "SubgroupBasis") -> "SubgroupBasis":
        return SubgroupBasis.generated_by(self.rank, self.rows + other.rows)

    @property
    def dim(self) -> int:
        return len(self.rows)

    def contains(self, v: Sequence[int]) -> bool:
        v = list(v)
        for row in self.rows:
            col = next(k for k, a in enumerate(row) if a)
            if v[col] % row[col]:
                return False
            q = v[col] // row[col]
            if q:
                v = [a - q * b for a, b in zip(v, row)]
        return not any(v)

    def to_json(self) -> dict:
        return {"rank": self.rank, "hnf": [list(r) for r in self.rows]}


@dataclass(frozen=True, eq=False)
class GroupHom:
    source: FreeAbGroup
    target: FreeAbGroup
    matrix: tuple

    def __post_init__(self):
        mat = tuple(tuple(int(a) for a in row) for row in self.matrix)
        if len(mat) != self.target.rank or any(len(r) != self.source.rank for r in mat):
            raise MalformedInputError(
                f"matrix shape does not match ranks {self.target.rank}x{self.source.rank}"
            )
        object.__setattr__(self, "matrix", mat)

    @classmethod
    def from_labels(cls, source, target, matrix) -> "GroupHom":
        return cls(FreeAbGroup(tuple(source)), FreeAbGroup(tuple(target)), tuple(map(tuple, matrix)))

    def __call__(self, v: Sequence[int]) -> list:
        return [sum(a * b for a, b in zip(row, v)) for row in self.matrix]

    def then(self, other: "GroupHom") -> "GroupHom":
        """``other ∘ self``."""
        if other.source.labels != self.target.labels:
            raise PreconditionError("homomorphisms do not compose")
        return GroupHom(self.source, other.target, tuple(map(tuple, _matmul(list(other.matrix), list(self.matrix), self.target.rank))) if other.target.rank else ())

    def to_json(self) -> dict:
        return {"source": list(self.source.labels), "target": list(self.target.labels), "matrix": [list(r) for r in self.matrix]}


def kernel(h: GroupHom) -> SubgroupBasis:
    """Reduce ``[Aᵀ | I]`` by unimodular row operations; rows with vanishing left part span the kernel."""
    n, m = h.source.rank, h.target.rank
    rows = [list(h.matrix[i][j] for i in range(m)) + [int(j == k) for k in range(n)] for j in range(n)]
    r0 = 0
    for col in range(m):
        piv = [i for i in range(r0, n) if rows[i][col]]
        if not piv:
            continue
        while len(piv) > 1:
            k = min(piv, key=lambda i: abs(rows[i][col]))
            for i in piv:
                if i != k:
                    q = rows[i][col] // rows[k][col]
                    rows[i] = [a - q * b for a, b in zip(rows[i], rows[k])]
            piv = [i for i in range(r0, n) if rows[i][col]]
        k = piv[0]
        rows[r0], rows[k] = rows[k], rows[r0]
        r0 += 1
    gens = [r[m:] for r in rows[r0:]]
    K = SubgroupBasis.generated_by(n, gens)
    for g in K.rows:  # certificate
        if any(h(g)):
            raise AssertionError("kernel generator is not annihilated")
    return K


def image(h: GroupHom) -> SubgroupBasis:
    m = h.target.rank
    cols = [[h.matrix[i][j] for i in range(m)] for j in range(h.source.rank)]
    return SubgroupBasis.generated_by(m, cols)


def quotient_invariants(rank: int, relations: SubgroupBasis) -> dict:
    """Invariant factors (> 1) and free rank of ``Z^rank / relations``."""
    if relations.rank != rank:
        raise PreconditionError("relations live in a different ambient group")
    if not relations.rows:
        return {"free_rank": rank, "torsion": [], "pretty": _pretty(rank, [])}
    U, D, V = smith_normal_form([list(r) for r in relations.rows])
    diag = [D[i][i] for i in range(min(len(D), rank)) if D[i][i]]
    torsion = [d for d in diag if d > 1]
    free = rank - len(diag)
    return {"free_rank": free, "torsion": torsion, "pretty": _pretty(free, torsion)}


def _pretty(free: int, torsion: list) -> str:
    parts = [f"Z/{d}" for d in torsion]
    if free:
        parts = (["Z"] if free == 1 else [f"Z^{free}"]) + parts
    return " + ".join(parts) if parts else "0"


def _surjective(h: GroupHom) -> bool:
    m = h.target.rank
    if m == 0:
        return True
    _, D, _ = smith_normal_form([list(r) for r in h.matrix])
    diag = [D[i][i] for i in range(min(m, h.source.rank))]
    return len(diag) == m and all(d == 1 for d in diag)


def _collapsed_basis(X: Sequence, C: frozenset) -> tuple:
    return (("pt", tuple(sorted(C, key=repr))),) + tuple(x for x in X if x not in C)


def s1_map(X: Sequence, C: Iterable, Cp: Iterable) -> tuple:
    """``Z^{X/C} → Z^{X/C'}``: the collapsed class and ``C' \\ C`` feed the new collapsed coordinate.

    Returns ``(hom, report)``; the report certifies surjectivity and the kernel description.
    """
    X = tuple(X)
    C, Cp = frozenset(C), frozenset(Cp)
    if not C:
        raise PreconditionError("the collapsed set must be nonempty")
    if not C <= Cp or not Cp <= set(X):
        raise PreconditionError("need C ⊆ C' ⊆ X")
    src = _collapsed_basis(X, C)
    tgt = _collapsed_basis(X, Cp)
    tpos = {lab: k for k, lab in enumerate(tgt)}
    mat = [[0] * len(src) for _ in tgt]
    for j, lab in enumerate(src):
        if j == 0 or lab in Cp:
            mat[0][j] = 1
        else:
            mat[tpos[lab]][j] = 1
    h = GroupHom(FreeAbGroup(src), FreeAbGroup(tgt), tuple(map(tuple, mat)))
    spos = {lab: k for k, lab in enumerate(src)}
    described = []
    for x in sorted(Cp - C, key=repr):
        v = [0] * len(src)
        v[0], v[spos[x]] = 1, -1
        described.append(v)
    K = kernel(h)
    report = {
        "surjective": _surjective(h),
        "kernel_matches_description": K == SubgroupBasis.generated_by(len(src), described),
        "kernel_rank": K.dim,
    }
    return h, report


def _quotient_map(X: tuple, C: frozenset) -> GroupHom:
    """``Z^X → Z^{X/C}``."""
    tgt = _collapsed_basis(X, C)
    tpos = {lab: k for k, lab in enumerate(tgt)}
    mat = [[0] * len(X) for _ in tgt]
    for j, x in enumerate(X):
        mat[0 if x in C else tpos[x]][j] = 1
    return GroupHom(FreeAbGroup(X), FreeAbGroup(tgt), tuple(map(tuple, mat)))


def theorem317_report(X: Sequence, chain: Sequence[Iterable], _cache: dict | None = None) -> dict:
    """Kernel identities and the quotient for a finite chain ``C_1 ⊆ ... ⊆ C_M``.

    ``s2`` is the quotient ``Z^X → Z^{X/C_1}`` followed by the chain of s1
    maps; ``s3`` is read off directly from ``Z ⊕ Z^{X \\ C_M}``.  The odd
    group is recorded as 0.
    """
    X = tuple(X)
    chain = [frozenset(C) for C in chain]
    if not chain:
        raise PreconditionError("the chain needs at least one set")
    if not chain[0]:
        raise PreconditionError("the first set of the chain must be nonempty")
    for a, b in zip(chain, chain[1:]):
        if not a <= b:
            raise PreconditionError("the chain is not increasing")
    if not chain[-1] <= set(X):
        raise PreconditionError("the chain leaves X")
    cache = {} if _cache is None else _cache
    s2 = _quotient_map(X, chain[0])
    steps = []
    for a, b in zip(chain, chain[1:]):
        key = ("s1", X, a, b)
        if key not in cache:
            cache[key] = s1_map(X, a, b)
        h, rep = cache[key]
        steps.append(rep)
        s2 = s2.then(h)
    CM = chain[-1]
    key = ("s3", X, CM)
    if key not in cache:
        rest = tuple(x for x in X if x not in CM)
        mat = [[int(x in CM) for x in X]] + [[int(x == y) for x in X] for y in rest]
        s3 = GroupHom(FreeAbGroup(X), FreeAbGroup((("Z", "C_M"),) + rest), tuple(map(tuple, mat)))
        cache[key] = kernel(s3)
    k3 = cache[key]
    # different chains often compose to the same matrix; memoize on the matrix itself
    key = ("s2", s2.matrix)
    if key not in cache:
        k2 = kernel(s2)
        cache[key] = (k2, quotient_invariants(len(X), k2))
    k2, q = cache[key]
    expected_free = 1 + len(set(X) - CM)
    return {
        "X": list(X),
        "chain": [sorted(C, key=repr) for C in chain],
        "s1_steps": steps,
        "s1_all_surjective": all(r["surjective"] for r in steps),
        "s1_kernels_match": all(r["kernel_matches_description"] for r in steps),
        "kernels_equal": k2 == k3,
        "quotient": q,
        "quotient_expected": "Z" if expected_free == 1 else f"Z + {_pretty(expected_free - 1, [])}",
        "quotient_matches": q["free_rank"] == expected_free and not q["torsion"],
        "K1": "0",
    }


def _kernel_mod(h: GroupHom, rel: SubgroupBasis | None) -> SubgroupBasis:
    """``{v : h(v) ∈ rel}``."""
    if rel is None or not rel.rows:
        return kernel(h)
    n, m = h.source.rank, h.target.rank
    big = [list(h.matrix[i]) + [-r[i] for r in rel.rows] for i in range(m)]
    hb = GroupHom(FreeAbGroup(tuple(range(n + len(rel.rows)))), FreeAbGroup(h.target.labels), tuple(map(tuple, big)))
    K = kernel(hb)
    return SubgroupBasis.generated_by(n, [r[:n] for r in K.rows])


def exactness_check(homs: Sequence[GroupHom], relations: Sequence | None = None) -> dict:
    """``image(h_i) = kernel(h_{i+1})`` at every interior node.

    ``relations[k]`` optionally presents node ``k`` (the source of ``homs[k]``;
    the last entry is the target of the last map) as a quotient of its free group.
    """
    if not homs:
        raise PreconditionError("empty chain")
    for a, b in zip(homs, homs[1:]):
        if a.target.rank != b.source.rank:
            raise PreconditionError("consecutive homomorphisms do not compose")
    rels = list(relations) if relations is not None else [None] * (len(homs) + 1)
    if len(rels) != len(homs) + 1:
        raise PreconditionError("need one relation lattice per node")
    nodes = []
    for i in range(len(homs) - 1):
        node = i + 1
        rank = homs[i].target.rank
        R = rels[node] if rels[node] is not None else SubgroupBasis(rank, ())
        im = image(homs[i]) + R
        ker = _kernel_mod(homs[i + 1], rels[node + 1])
        ker = ker + R
        ok = im == ker
        witness = None
        if not ok:
            witness = next((list(r) for r in ker.rows if not im.contains(r)), None)
            kind = "kernel element outside the image"
            if witness is None:
                witness = next((list(r) for r in im.rows if not ker.contains(r)), None)
                kind = "image element outside the kernel"
            witness = {"vector": witness, "kind": kind}
        nodes.append({"node": node, "exact": ok, "witness": witness})
    return {"exact": all(n["exact"] for n in nodes), "nodes": nodes}


def discrete_mv_chain(Y: Iterable[Hashable], Z: Iterable[Hashable]) -> list:
    """``0 → Z^{Y∩Z} → Z^Y ⊕ Z^Z → Z^{Y∪Z} → 0`` with maps ``i₁ ⊕ i₂`` and ``j₁ − j₂``."""
    Y, Z = sorted(set(Y), key=repr), sorted(set(Z), key=repr)
    I = [x for x in Y if x in set(Z)]
    U = sorted(set(Y) | set(Z), key=repr)
    mid = [("Y", y) for y in Y] + [("Z", z) for z in Z]
    zero_in = GroupHom(FreeAbGroup(()), FreeAbGroup(tuple(I)), tuple(() for _ in I))
    inc = GroupHom(
        FreeAbGroup(tuple(I)),
        FreeAbGroup(tuple(mid)),
        tuple(tuple(int(lab[1] == x) for x in I) for lab in mid),
    )
    diff = GroupHom(
        FreeAbGroup(tuple(mid)),
        FreeAbGroup(tuple(U)),
        tuple(tuple((1 if lab[0] == "Y" else -1) * int(lab[1] == u) for lab in mid) for u in U),
    )
    zero_out = GroupHom(FreeAbGroup(tuple(U)), FreeAbGroup(()), ())
    return [zero_in, inc, diff, zero_out]
