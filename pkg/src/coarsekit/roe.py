"""Finite matrix model of controlled operators on l^p(X) ⊗ l^p(channels).

A basis vector is a pair ``(point, channel)``.  Entries are exact Fractions
keyed by flat indices ``row = y * m_target + j`` and ``col = x * m_source + i``.
The support of an operator is the set of ``(x, y)`` = (column point, row
point) carrying a nonzero entry; this is the only place the convention lives.
Local compactness is automatic for finite matrices and is not checked.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .coarse import Entourage, PointMap, bornologous_profile
from .errors import MalformedInputError, PostconditionError, PreconditionError
from .exact import as_fraction, fraction_str, to_json
from .spaces import FilteredMetricSpace

__all__ = [
    "FiniteOperator",
    "IsometryPair",
    "Norm2",
    "NormLowerBound",
    "support",
    "propagation",
    "truncate",
    "split_along",
    "opnorm",
    "covering_isometry",
    "conjugate",
    "swindle_rotation",
    "block_swindle",
    "block_matrix",
]


@dataclass(frozen=True, eq=False)
class FiniteOperator:
    """Sparse exact matrix from ``(source, m_source)`` to ``(target, m_target)``."""

    source: FilteredMetricSpace
    m_source: int
    target: FilteredMetricSpace
    m_target: int
    entries: dict

    def __post_init__(self):
        if self.m_source < 1 or self.m_target < 1:
            raise MalformedInputError("channel counts must be positive")
        rows, cols = self.shape
        clean = {}
        for (r, c), v in self.entries.items():
            v = as_fraction(v)
            if not (0 <= r < rows and 0 <= c < cols):
                raise MalformedInputError(f"entry ({r}, {c}) outside a {rows}x{cols} operator")
            if v:
                clean[(int(r), int(c))] = v
        object.__setattr__(self, "entries", clean)

    # construction -----------------------------------------------------------

    @classmethod
    def on(cls, space: FilteredMetricSpace, m: int, entries: dict | None = None) -> "FiniteOperator":
        return cls(space, m, space, m, entries or {})

    @classmethod
    def from_labels(cls, space: FilteredMetricSpace, m: int, items: Iterable) -> "FiniteOperator":
        """Entries given as ``(y, j, x, i, value)`` with point labels."""
        ent = {}
        for y, j, x, i, v in items:
            if not (0 <= j < m and 0 <= i < m):
                raise MalformedInputError(f"channel index outside [0, {m})")
            ent[(space.index_of(y) * m + j, space.index_of(x) * m + i)] = as_fraction(v)
        return cls.on(space, m, ent)

    @classmethod
    def identity(cls, space: FilteredMetricSpace, m: int) -> "FiniteOperator":
        return cls.on(space, m, {(k, k): Fraction(1) for k in range(len(space) * m)})

    @classmethod
    def zero_like(cls, T: "FiniteOperator") -> "FiniteOperator":
        return cls(T.source, T.m_source, T.target, T.m_target, {})

    # shape and algebra ----------------------------------------------------

    @property
    def shape(self) -> tuple:
        return (len(self.target) * self.m_target, len(self.source) * self.m_source)

    def _same_shape(self, other: "FiniteOperator"):
        if self.shape != other.shape or self.m_source != other.m_source or self.m_target != other.m_target:
            raise PreconditionError(f"shape mismatch: {self.shape} vs {other.shape}")

    def __add__(self, other: "FiniteOperator") -> "FiniteOperator":
        self._same_shape(other)
        out = dict(self.entries)
        for k, v in other.entries.items():
            out[k] = out.get(k, 0) + v
        return FiniteOperator(self.source, self.m_source, self.target, self.m_target, out)

    def __neg__(self) -> "FiniteOperator":
        return self.scale(-1)

    def __sub__(self, other: "FiniteOperator") -> "FiniteOperator":
        return self + (-other)

    def scale(self, c) -> "FiniteOperator":
        c = as_fraction(c)
        return FiniteOperator(self.source, self.m_source, self.target, self.m_target, {k: c * v for k, v in self.entries.items()})

    def __matmul__(self, other: "FiniteOperator") -> "FiniteOperator":
        """``self ∘ other``."""
        if other.shape[0] != self.shape[1] or other.m_target != self.m_source:
            raise PreconditionError(f"cannot compose {self.shape} after {other.shape}")
        by_row: dict = {}
        for (k, c), b in other.entries.items():
            by_row.setdefault(k, []).append((c, b))
        out: dict = {}
        for (r, k), a in self.entries.items():
            for c, b in by_row.get(k, ()):
                out[(r, c)] = out.get((r, c), 0) + a * b
        return FiniteOperator(other.source, other.m_source, self.target, self.m_target, out)

    def transpose(self) -> "FiniteOperator":
        return FiniteOperator(self.target, self.m_target, self.source, self.m_source, {(c, r): v for (r, c), v in self.entries.items()})

    def __eq__(self, other):
        return isinstance(other, FiniteOperator) and self.shape == other.shape and self.entries == other.entries

    def __hash__(self):
        return hash(frozenset(self.entries.items()))

    def is_zero(self) -> bool:
        return not self.entries

    def dense(self) -> list:
        rows, cols = self.shape
        M = [[Fraction(0)] * cols for _ in range(rows)]
        for (r, c), v in self.entries.items():
            M[r][c] = v
        return M

    def to_json(self) -> dict:
        ms, mt = self.m_source, self.m_target
        items = sorted(self.entries.items())
        return {
            "channels": mt if ms == mt else [ms, mt],
            "entries": [
                [self.target.points[r // mt], r % mt, self.source.points[c // ms], c % ms, fraction_str(v)]
                for (r, c), v in items
            ],
        }


def support(T: FiniteOperator) -> frozenset:
    """``{(x, y)}``: column point ``x`` and row point ``y`` of each nonzero block."""
    ms, mt = T.m_source, T.m_target
    return frozenset((T.source.points[c // ms], T.target.points[r // mt]) for (r, c) in T.entries)


def _support_idx(T: FiniteOperator) -> set:
    ms, mt = T.m_source, T.m_target
    return {(c // ms, r // mt) for (r, c) in T.entries}


def propagation(T: FiniteOperator):
    if T.source is not T.target and T.source.points != T.target.points:
        raise PreconditionError("propagation needs an operator on a single space")
    best = 0
    for x, y in _support_idx(T):
        d = T.source.di(x, y)
        if d > best:
            best = d
    return best


def _keep(T: FiniteOperator, rows_ok, cols_ok) -> FiniteOperator:
    ms, mt = T.m_source, T.m_target
    ent = {(r, c): v for (r, c), v in T.entries.items() if rows_ok(r // mt) and cols_ok(c // ms)}
    return FiniteOperator(T.source, ms, T.target, mt, ent)


def truncate(T: FiniteOperator, Y: Iterable) -> FiniteOperator:
    """``χ_Y T χ_Y``."""
    idx = {T.source.index_of(p) for p in Y}
    return _keep(T, idx.__contains__, idx.__contains__)


def split_along(T: FiniteOperator, Y: Iterable, Z: Iterable) -> tuple:
    """``T_Y = χ_Y T`` and ``T_Z = T - T_Y``, with the support certificate.

    Returns ``(T_Y, T_Z, report)``; a failing postcondition raises.
    """
    space = T.source
    y = {space.index_of(p) for p in Y}
    z = {space.index_of(p) for p in Z}
    if len(y | z) != len(space):
        raise PreconditionError("Y and Z do not cover the space")
    TY = _keep(T, y.__contains__, lambda c: True)
    TZ = T - TY
    R = propagation(T)
    yR = set(np.flatnonzero(_thick(space, y, R)).tolist())
    zR = set(np.flatnonzero(_thick(space, z, R)).tolist())
    report = {
        "propagation": to_json(R),
        "reassembles": TY + TZ == T,
        "support_Y_in_thickening": all(a in yR and b in yR for a, b in _support_idx(TY)),
        "support_Z_in_thickening": all(a in zR and b in zR for a, b in _support_idx(TZ)),
    }
    if not all(report[k] for k in ("reassembles", "support_Y_in_thickening", "support_Z_in_thickening")):
        raise PostconditionError("split_along certificate failed", report)
    return TY, TZ, report


def _thick(space, idx, R):
    from .coarse import thickening

    return thickening(space, idx, R)


# exact norms -----------------------------------------------------------------


def _is_psd(M: list, strict: bool = False) -> bool:
    """Exact (semi)definiteness of a symmetric rational matrix by LDLᵀ."""
    A = [row[:] for row in M]
    n = len(A)
    for k in range(n):
        piv = A[k][k]
        if piv < 0 or (strict and piv == 0):
            return False
        if piv == 0:
            if any(A[k][j] != 0 for j in range(k + 1, n)):
                return False
            continue
        for i in range(k + 1, n):
            if A[i][k] == 0:
                continue
            f = A[i][k] / piv
            row_k = A[k]
            row_i = A[i]
            for j in range(k + 1, n):
                if row_k[j]:
                    row_i[j] -= f * row_k[j]
    return True


def _gram(T: FiniteOperator) -> list:
    """The smaller of ``TᵀT`` and ``TTᵀ`` restricted to nonzero lines."""
    rows = sorted({r for r, _ in T.entries})
    cols = sorted({c for _, c in T.entries})
    if len(rows) < len(cols):
        T = T.transpose()
        rows, cols = cols, rows
    pos = {c: k for k, c in enumerate(cols)}
    by_row: dict = {}
    for (r, c), v in T.entries.items():
        by_row.setdefault(r, []).append((pos[c], v))
    n = len(cols)
    G = [[Fraction(0)] * n for _ in range(n)]
    for items in by_row.values():
        for a, va in items:
            for b, vb in items:
                G[a][b] += va * vb
    return G


class Norm2:
    """The exact 2-norm ``sqrt(λ_max(G))`` of an operator with Gram matrix ``G``.

    Comparisons are decided exactly: a rational threshold between the float
    estimates is certified by definiteness tests, and near-ties fall back to
    an algebraic comparison of the largest characteristic roots.
    """

    def __init__(self, gram: list):
        self.gram = gram
        self.n = len(gram)
        if self.n:
            self.approx_sq = float(max(np.linalg.eigvalsh(np.array(gram, dtype=float))))
        else:
            self.approx_sq = 0.0
        self.approx = math.sqrt(max(self.approx_sq, 0.0))

    def __float__(self):
        return self.approx

    def __repr__(self):
        return f"Norm2(~{self.approx:.12g})"

    # λ_max(G) versus a rational c2
    def _sq_le(self, c2: Fraction) -> bool:
        if not self.n:
            return c2 >= 0
        return _is_psd([[(c2 if i == j else 0) - self.gram[i][j] for j in range(self.n)] for i in range(self.n)])

    def _sq_ge(self, c2: Fraction) -> bool:
        if not self.n:
            return c2 <= 0
        return not _is_psd([[(c2 if i == j else 0) - self.gram[i][j] for j in range(self.n)] for i in range(self.n)], strict=True)

    def _charpoly(self):
        from sympy import Poly, QQ, symbols
        from sympy.polys.matrices import DomainMatrix

        t = symbols("t")
        if not self.n:
            return Poly(t, t, domain=QQ)
        dm = DomainMatrix([[QQ(v.numerator, v.denominator) for v in row] for row in self.gram], (self.n, self.n), QQ)
        return Poly(dm.charpoly(), t, domain=QQ)

    def _largest_root_interval(self):
        p = self._charpoly().sqf_part()
        (a, b), _ = p.intervals()[-1]
        return p, Fraction(int(a.p), int(a.q)), Fraction(int(b.p), int(b.q))

    def compare(self, other) -> int:
        if isinstance(other, Norm2):
            return _compare_norms(self, other)
        c = as_fraction(other)
        if c < 0:
            return 1
        c2 = c * c
        le, ge = self._sq_le(c2), self._sq_ge(c2)
        return 0 if (le and ge) else (-1 if le else 1)

    def __eq__(self, other):
        return self.compare(other) == 0

    def __le__(self, other):
        return self.compare(other) <= 0

    def __lt__(self, other):
        return self.compare(other) < 0

    def __ge__(self, other):
        return self.compare(other) >= 0

    def __gt__(self, other):
        return self.compare(other) > 0

    __hash__ = None

    def exact_value(self):
        """The norm as a Fraction when it is rational, else None."""
        guess = Fraction(self.approx).limit_denominator(10**6)
        return guess if self.compare(guess) == 0 else None

    def to_json(self) -> dict:
        v = self.exact_value()
        return {
            "kind": "exact",
            "value": fraction_str(v) if v is not None else None,
            "approx": self.approx,
            "definition": "sqrt of the largest eigenvalue of the Gram matrix",
        }


def _compare_norms(a: Norm2, b: Norm2) -> int:
    if a.gram == b.gram:
        return 0
    fa, fb = a.approx_sq, b.approx_sq
    scale = 1.0 + max(abs(fa), abs(fb))
    if abs(fa - fb) > 1e-9 * scale:
        q = Fraction((fa + fb) / 2)
        lo, hi = (a, b) if fa < fb else (b, a)
        if lo._sq_le(q) and hi._sq_ge(q):
            return -1 if fa < fb else 1
    # near tie: compare the largest roots algebraically
    pa, a0, a1 = a._largest_root_interval()
    pb, b0, b1 = b._largest_root_interval()
    from sympy import Rational, gcd

    g = gcd(pa, pb)
    for _ in range(200):
        if a1 < b0:
            return -1
        if b1 < a0:
            return 1
        lo, hi = max(a0, b0), min(a1, b1)
        if g.degree() > 0 and g.count_roots(Rational(lo.numerator, lo.denominator), Rational(hi.numerator, hi.denominator)) > 0:
            return 0
        ra = pa.refine_root(Rational(a0.numerator, a0.denominator), Rational(a1.numerator, a1.denominator), steps=8)
        rb = pb.refine_root(Rational(b0.numerator, b0.denominator), Rational(b1.numerator, b1.denominator), steps=8)
        a0, a1 = (Fraction(int(x.p), int(x.q)) for x in ra)
        b0, b1 = (Fraction(int(x.p), int(x.q)) for x in rb)
    raise AssertionError("root comparison did not terminate")


@dataclass(frozen=True)
class NormLowerBound:
    value: float
    p: float
    family: str = "basis vectors, all-ones, alternating signs and the top singular vector"

    def __float__(self):
        return self.value

    def to_json(self) -> dict:
        return {"kind": "lower_bound", "p": self.p, "value": self.value, "test_vectors": self.family}


def opnorm(T: FiniteOperator, p=1):
    """Exact max column sum at ``p = 1``, exact :class:`Norm2` at ``p = 2``, a lower bound otherwise."""
    p = float(p) if not isinstance(p, int) else p
    if p < 1:
        raise PreconditionError("p must be at least 1")
    if p == 1:
        cols: dict = {}
        for (r, c), v in T.entries.items():
            cols[c] = cols.get(c, 0) + abs(v)
        return max(cols.values(), default=Fraction(0))
    if p == 2:
        return Norm2(_gram(T))
    M = np.array(T.dense(), dtype=float)
    rows, cols = M.shape
    tests = [np.eye(cols)[k] for k in range(cols)]
    tests += [np.ones(cols), np.array([(-1) ** k for k in range(cols)], dtype=float)]
    if M.size:
        tests.append(np.linalg.svd(M)[2][0])
    best = 0.0
    for v in tests:
        nv = np.linalg.norm(v, ord=p)
        if nv > 0:
            best = max(best, float(np.linalg.norm(M @ v, ord=p) / nv))
    return NormLowerBound(best, p)


# covering isometries ---------------------------------------------------------


@dataclass(frozen=True, eq=False)
class IsometryPair:
    V: FiniteOperator
    Vplus: FiniteOperator
    f: PointMap

    def report(self) -> dict:
        I = FiniteOperator.identity(self.V.source, self.V.m_source)
        supp_v = _support_idx(self.V)
        supp_vp = _support_idx(self.Vplus)
        graph_ok = all(self.f.values[x] == y for x, y in supp_v)
        return {
            "left_inverse": self.Vplus @ self.V == I,
            "support_symmetric": supp_vp == {(y, x) for x, y in supp_v},
            "support_on_graph": graph_ok,
        }


def covering_isometry(f: PointMap, m: int, m_target: int | None = None, tolerance: Entourage | None = None) -> IsometryPair:
    """``V: (x, i) ↦ (f(x), slot(x) * m + i)`` with fibers packed by ascending source index."""
    fibers: dict = {}
    for x, y in enumerate(f.values):
        fibers.setdefault(y, []).append(x)
    need = m * max((len(v) for v in fibers.values()), default=1)
    m_target = need if m_target is None else m_target
    if m_target < need:
        raise PreconditionError(f"target needs at least {need} channels, got {m_target}")
    slot = {x: k for xs in fibers.values() for k, x in enumerate(xs)}
    ent = {}
    for x, y in enumerate(f.values):
        for i in range(m):
            ent[(y * m_target + slot[x] * m + i, x * m + i)] = Fraction(1)
    V = FiniteOperator(f.source, m, f.target, m_target, ent)
    pair = IsometryPair(V, V.transpose(), f)
    rep = pair.report()
    if tolerance is not None:
        rep["diagonal_in_tolerance"] = all((y, y) in tolerance.pairs for y in set(f.values))
    if not all(rep.values()):
        raise PostconditionError("covering isometry certificate failed", rep)
    return pair


def conjugate(pair: IsometryPair, T: FiniteOperator) -> tuple:
    """``Ad_V(T) = V T V⁺`` with its propagation certificate.

    The tolerance radius ``sup d(y, f(x))`` over the support of ``V`` is 0 for
    pairs built by :func:`covering_isometry`, so the bound is the control
    function of ``f`` at ``prop(T)``.
    """
    if T.shape[1] != pair.V.shape[1] or T.shape[0] != pair.V.shape[1]:
        raise PreconditionError("operator and isometry shapes do not match")
    A = pair.V @ T @ pair.Vplus
    R = propagation(T)
    tol = max((pair.f.target.di(pair.f.values[x], y) for x, y in _support_idx(pair.V)), default=0)
    control = dict(bornologous_profile(pair.f, [R]))[R]
    prop = propagation(A)
    report = {
        "propagation_before": to_json(R),
        "propagation_after": to_json(prop),
        "bound": to_json(control + 2 * tol),
        "holds": prop <= control + 2 * tol,
    }
    return A, report


def block_matrix(blocks: Sequence[Sequence]) -> FiniteOperator:
    """Assemble a block operator; block ``(a, b)`` occupies channel ranges ``a`` and ``b``.

    All blocks live on one space; ``None`` stands for a zero block.  The
    result has channels stacked per point: channel ``offset_a + j``.
    """
    ref = next(B for row in blocks for B in row if B is not None)
    space = ref.source
    row_m = []
    for row in blocks:
        B = next((B for B in row if B is not None), None)
        row_m.append(B.m_target if B is not None else None)
    col_m = []
    for b in range(len(blocks[0])):
        B = next((row[b] for row in blocks if row[b] is not None), None)
        col_m.append(B.m_source if B is not None else None)
    if None in row_m or None in col_m:
        raise PreconditionError("every block row and column needs at least one nonzero block")
    mt, ms = sum(row_m), sum(col_m)
    roff = np.cumsum([0] + row_m[:-1])
    coff = np.cumsum([0] + col_m[:-1])
    ent = {}
    for a, row in enumerate(blocks):
        for b, B in enumerate(row):
            if B is None:
                continue
            if B.m_target != row_m[a] or B.m_source != col_m[b]:
                raise PreconditionError("block channel counts are inconsistent")
            for (r, c), v in B.entries.items():
                y, j = divmod(r, B.m_target)
                x, i = divmod(c, B.m_source)
                ent[(y * mt + int(roff[a]) + j, x * ms + int(coff[b]) + i)] = v
    return FiniteOperator(space, ms, space, mt, ent)


def _diag(blocks: Sequence[FiniteOperator]) -> FiniteOperator:
    k = len(blocks)
    return block_matrix([[blocks[a] if a == b else None for b in range(k)] for a in range(k)])


def swindle_rotation(Vk: IsometryPair, Vk1: IsometryPair) -> tuple:
    """``U_k`` and ``U_k⁺`` with the inverse and intertwining identities verified."""
    V0, V0p, V1, V1p = Vk.V, Vk.Vplus, Vk1.V, Vk1.Vplus
    if V0.shape != V1.shape or V0.target.points != V1.target.points:
        raise PreconditionError("the two isometries must share source and target")
    one = FiniteOperator.identity(V0.target, V0.m_target)
    P0, P1 = V0 @ V0p, V1 @ V1p
    U = block_matrix([[V1 @ V0p, one - P1], [one - P0, V0 @ V1p]])
    Up = block_matrix([[V0 @ V1p, one - P0], [one - P1, V1 @ V0p]])
    I2 = FiniteOperator.identity(V0.target, 2 * V0.m_target)
    zeroV = FiniteOperator(V0.source, V0.m_source, V0.target, V0.m_target, {})
    zeroVp = zeroV.transpose()
    lhs = U @ _rect([[V0, zeroV], [zeroV, zeroV]])
    rhs = _rect([[V1, zeroV], [zeroV, zeroV]])
    lhs2 = _rect([[V0p, zeroVp], [zeroVp, zeroVp]]) @ Up
    rhs2 = _rect([[V1p, zeroVp], [zeroVp, zeroVp]])
    report = {
        "U_Uplus_identity": U @ Up == I2,
        "Uplus_U_identity": Up @ U == I2,
        "intertwines_V": lhs == rhs,
        "intertwines_Vplus": lhs2 == rhs2,
    }
    if not all(report.values()):
        raise PostconditionError("swindle rotation identities failed", report)
    return U, Up, report


def _rect(blocks) -> FiniteOperator:
    """Block matrix whose blocks may map between two different spaces."""
    src, tgt = blocks[0][0].source, blocks[0][0].target
    ms = [row_b.m_source for row_b in blocks[0]]
    mt = [row[0].m_target for row in blocks]
    MS, MT = sum(ms), sum(mt)
    ent = {}
    roff = np.cumsum([0] + mt[:-1])
    coff = np.cumsum([0] + ms[:-1])
    for a, row in enumerate(blocks):
        for b, B in enumerate(row):
            for (r, c), v in B.entries.items():
                y, j = divmod(r, B.m_target)
                x, i = divmod(c, B.m_source)
                ent[(y * MT + int(roff[a]) + j, x * MS + int(coff[b]) + i)] = v
    return FiniteOperator(src, MS, tgt, MT, ent)


@dataclass(frozen=True, eq=False)
class BlockSwindle:
    beta2: FiniteOperator
    beta3: FiniteOperator
    U: FiniteOperator
    Uplus: FiniteOperator
    report: dict = field(default_factory=dict)


def block_swindle(T: FiniteOperator, pairs: Sequence[IsometryPair], K: int | None = None) -> BlockSwindle:
    """``β₂(T) = diag(Ad_{V_0} T, ..., Ad_{V_{K-1}} T)`` and ``β₃(T) = diag(Ad_{V_1} T, ...)``.

    With ``K`` isometries only ``K - 1`` blocks of ``β₃`` exist; the identity
    ``U (β₂ ⊕ 0) U⁻¹ = (β₃ ⊕ 0)`` is verified on those common blocks and the
    unmatched last block of ``β₂`` is reported as the truncation edge.
    """
    K = len(pairs) if K is None else K
    if K < 2:
        raise PreconditionError("block swindles need K >= 2")
    if len(pairs) < K:
        raise PreconditionError(f"need {K} isometry pairs, got {len(pairs)}")
    ads = [conjugate(pairs[k], T)[0] for k in range(K)]
    beta2 = _diag(ads)
    beta3 = _diag(ads[1:])
    rots = [swindle_rotation(pairs[k], pairs[k + 1]) for k in range(K - 1)]
    U = _diag([u for u, _, _ in rots])
    Up = _diag([up for _, up, _ in rots])
    zero = FiniteOperator.zero_like(ads[0])
    lhs = _diag([_pad(ads[k], zero) for k in range(K - 1)])
    rhs = _diag([_pad(ads[k + 1], zero) for k in range(K - 1)])
    report = {
        "blocks_checked": K - 1,
        "conjugation_identity": U @ lhs @ Up == rhs,
        "edge": f"block {K - 1} of beta2 has no partner in the {K}-fold truncation",
        "first_block_of_difference": _block(_diag(ads[:-1]) - beta3, 0, ads[0].m_target) == ads[0] - ads[1],
        "first_block_is_T": (ads[0] == T) if ads[0].shape == T.shape else None,
    }
    return BlockSwindle(beta2, beta3, U, Up, report)


def _block(A: FiniteOperator, a: int, m: int) -> FiniteOperator:
    """Diagonal block ``a`` of width ``m`` channels."""
    ms, mt = A.m_source, A.m_target
    ent = {}
    for (r, c), v in A.entries.items():
        y, j = divmod(r, mt)
        x, i = divmod(c, ms)
        if a * m <= j < (a + 1) * m and a * m <= i < (a + 1) * m:
            ent[(y * m + j - a * m, x * m + i - a * m)] = v
    return FiniteOperator(A.source, m, A.target, m, ent)


def _pad(A: FiniteOperator, zero: FiniteOperator) -> FiniteOperator:
    """``[[A, 0], [0, 0]]`` on doubled channels."""
    return _rect([[A, zero], [zero, zero]])
