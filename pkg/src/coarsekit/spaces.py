"""Finite metric spaces with exhaustion filtrations, covers and cover statistics.

Points are opaque hashable labels.  Internally everything is indexed by the
position of a label in ``space.points``; the distance matrix is a numpy array
of dtype ``int64`` when every distance is an integer and ``object`` (holding
Fractions or :class:`~coarsekit.exact.PiRational`) otherwise, so all
comparisons stay exact.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Hashable, Iterable, Sequence

import networkx as nx
import numpy as np

from .errors import (
    CapacityError,
    ConstructionError,
    MalformedInputError,
    PostconditionError,
    PreconditionError,
)
from .exact import FLOAT_TOL, PiRational, as_fraction, to_json

__all__ = [
    "FilteredMetricSpace",
    "Cover",
    "AntiCechSequence",
    "verify_metric",
    "ball",
    "bounded_geometry_profile",
    "uniform_discreteness_gap",
    "cover_diameter",
    "lebesgue_lower_bound",
    "lebesgue_exact",
    "r_degree",
    "degree",
    "refines",
    "net_cover",
    "build_anticech",
    "brick_cover",
    "vertex_assignment",
]


def _exact(value):
    if isinstance(value, (PiRational, Fraction)):
        return value
    if isinstance(value, float) and math.isinf(value):
        return value
    return as_fraction(value)


def _matrix(rows) -> np.ndarray:
    """Pack exact distances into int64 when possible, else an object array."""
    vals = [[_exact(v) for v in row] for row in rows]
    if all(isinstance(v, Fraction) and v.denominator == 1 for row in vals for v in row):
        return np.array([[int(v) for v in row] for row in vals], dtype=np.int64)
    arr = np.empty((len(vals), len(vals)), dtype=object)
    for i, row in enumerate(vals):
        for j, v in enumerate(row):
            arr[i, j] = v
    return arr


def _le(row: np.ndarray, R) -> np.ndarray:
    """Exact elementwise ``row <= R``."""
    if isinstance(R, float) and math.isinf(R):
        return np.ones(row.shape, dtype=bool) if R > 0 else np.zeros(row.shape, dtype=bool)
    if row.dtype.kind == "f":
        return row <= float(R) + FLOAT_TOL
    if row.dtype != object:
        if isinstance(R, PiRational):
            if R.quarter_turns == 0:
                R = R.rational
            else:
                return np.array([v <= R for v in row.tolist()], dtype=bool)
        R = as_fraction(R)
        return row <= math.floor(R)
    return np.array([v <= R for v in row], dtype=bool)


def _lt(row: np.ndarray, R) -> np.ndarray:
    """Exact elementwise ``row < R``."""
    if isinstance(R, float) and math.isinf(R):
        return np.ones(row.shape, dtype=bool) if R > 0 else np.zeros(row.shape, dtype=bool)
    if row.dtype.kind == "f":
        return row < float(R) - FLOAT_TOL
    if row.dtype != object:
        if isinstance(R, PiRational):
            if R.quarter_turns == 0:
                R = R.rational
            else:
                return np.array([v < R for v in row.tolist()], dtype=bool)
        R = as_fraction(R)
        return row < math.ceil(R)
    return np.array([v < R for v in row], dtype=bool)


def _to_number(v):
    """Numpy scalar -> python exact number."""
    if isinstance(v, np.integer):
        return int(v)
    return v


@dataclass(frozen=True, eq=False)
class FilteredMetricSpace:
    """A finite metric space with a chain ``K_1 ⊆ ... ⊆ K_N = points``.

    The filtration stands in for a compact exhaustion; every "outside a compact
    set" condition is evaluated against its members.
    """

    points: tuple
    dist: np.ndarray
    filtration: tuple = ()

    def __post_init__(self):
        pts = tuple(self.points)
        object.__setattr__(self, "points", pts)
        if len(set(pts)) != len(pts):
            raise MalformedInputError("duplicate point ids")
        if self.dist.shape != (len(pts), len(pts)):
            raise MalformedInputError(f"distance matrix shape {self.dist.shape} does not match {len(pts)} points")
        index = {p: i for i, p in enumerate(pts)}
        object.__setattr__(self, "_index", index)
        if not self.filtration:
            filt = (frozenset(range(len(pts))),)
        else:
            filt = tuple(frozenset(s) for s in self.filtration)
        for a, b in zip(filt, filt[1:]):
            if not a <= b:
                raise MalformedInputError("filtration is not a chain under inclusion")
        if filt[-1] != frozenset(range(len(pts))):
            raise MalformedInputError("filtration must end at the full point set")
        object.__setattr__(self, "filtration", filt)

    # construction -------------------------------------------------------

    @classmethod
    def from_matrix(cls, points, matrix, filtration=None, validate=False):
        pts = tuple(points)
        dist = matrix if isinstance(matrix, np.ndarray) else _matrix(matrix)
        if validate:
            report = verify_metric(pts, dist)
            if not report["ok"]:
                raise MalformedInputError(f"not a metric: {report['violation']} at {report['witness']}")
        return cls(pts, dist, cls._filtration_indices(pts, filtration))

    @classmethod
    def from_function(cls, points, metric: Callable, filtration=None):
        pts = tuple(points)
        rows = [[metric(a, b) for b in pts] for a in pts]
        return cls(pts, _matrix(rows), cls._filtration_indices(pts, filtration))

    @classmethod
    def from_graph(cls, points, edges, filtration=None):
        """Shortest-path metric of a weighted graph given as ``(u, v, w)`` triples."""
        pts = tuple(points)
        g = nx.Graph()
        g.add_nodes_from(pts)
        for u, v, w in edges:
            if u not in g or v not in g:
                raise MalformedInputError(f"edge ({u!r}, {v!r}) uses an unknown point")
            w = as_fraction(w)
            if w <= 0:
                raise MalformedInputError("edge weights must be positive")
            if g.has_edge(u, v):
                w = min(w, g[u][v]["weight"])
            g.add_edge(u, v, weight=w)
        if pts and not nx.is_connected(g):
            raise MalformedInputError("graph metric is infinite between components")
        lengths = dict(nx.all_pairs_dijkstra_path_length(g, weight="weight"))
        rows = [[lengths[a][b] if a != b else 0 for b in pts] for a in pts]
        return cls(pts, _matrix(rows), cls._filtration_indices(pts, filtration))

    @classmethod
    def integer_interval(cls, lo: int, hi: int, filtration=None):
        pts = tuple(range(lo, hi + 1))
        arr = np.array(pts, dtype=np.int32)
        return cls(pts, np.abs(arr[:, None] - arr[None, :]), cls._filtration_indices(pts, filtration))

    @classmethod
    def integer_grid(cls, n: int, lo: int, hi: int, filtration=None):
        """``Z^n ∩ [lo, hi]^n`` with the l1 metric; labels are ints for n = 1."""
        if n == 1:
            return cls.integer_interval(lo, hi, filtration)
        pts = tuple(itertools.product(range(lo, hi + 1), repeat=n))
        arr = np.array(pts, dtype=np.int32)
        dist = np.zeros((len(pts), len(pts)), dtype=np.int32)
        for k in range(n):
            dist += np.abs(arr[:, k, None] - arr[None, :, k])
        return cls(pts, dist, cls._filtration_indices(pts, filtration))

    @staticmethod
    def _filtration_indices(pts, filtration):
        if not filtration:
            return ()
        index = {p: i for i, p in enumerate(pts)}
        out = []
        for level in filtration:
            try:
                out.append(frozenset(index[p] for p in level))
            except KeyError as exc:
                raise MalformedInputError(f"filtration uses unknown point {exc.args[0]!r}") from None
        return tuple(out)

    def with_filtration(self, filtration) -> "FilteredMetricSpace":
        return FilteredMetricSpace(self.points, self.dist, self._filtration_indices(self.points, filtration))

    def subspace(self, labels) -> "FilteredMetricSpace":
        idx = sorted(self.index_of(p) for p in labels)
        filt = []
        for level in self.filtration:
            kept = [p for p in idx if p in level]
            if kept or filt:
                filt.append([self.points[p] for p in kept])
        filt = [f for f in filt if f]
        return FilteredMetricSpace.from_matrix(
            [self.points[i] for i in idx], self.dist[np.ix_(idx, idx)], filt or None
        )

    # access --------------------------------------------------------------

    def __len__(self):
        return len(self.points)

    def index_of(self, label) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise PreconditionError(f"unknown point id {label!r}") from None

    def __contains__(self, label):
        return label in self._index

    def d(self, x, y):
        return _to_number(self.dist[self.index_of(x), self.index_of(y)])

    def di(self, i: int, j: int):
        return _to_number(self.dist[i, j])

    def ball_indices(self, i: int, R) -> np.ndarray:
        return np.flatnonzero(_le(self.dist[i], R))

    def open_ball_indices(self, i: int, R) -> np.ndarray:
        return np.flatnonzero(_lt(self.dist[i], R))

    def diameter_of(self, idx) -> object:
        idx = list(idx)
        if len(idx) <= 1:
            return 0
        sub = self.dist[np.ix_(idx, idx)]
        return _to_number(sub.max())

    @cached_property
    def realized_distances(self) -> list:
        """Sorted distinct pairwise distances, including 0."""
        if self.dist.dtype != object:
            return [int(v) for v in np.unique(self.dist)]
        return sorted(set(self.dist.ravel().tolist()))

    def level_of(self, i: int) -> int:
        """1-based index of the first filtration set containing point ``i``."""
        for k, level in enumerate(self.filtration, start=1):
            if i in level:
                return k
        raise AssertionError("filtration does not cover the space")

    def to_json(self) -> dict:
        return {
            "points": list(self.points),
            "metric": {"kind": "matrix", "d": [[to_json(_to_number(v)) for v in row] for row in self.dist]},
            "filtration": [[self.points[i] for i in sorted(level)] for level in self.filtration],
        }


def verify_metric(points: Sequence, distances) -> dict:
    """Check the metric axioms on a finite table of distances.

    ``distances`` is either an ``n x n`` matrix or a mapping from unordered
    pairs ``(a, b)`` to distances.  Returns ``{"ok": True}`` or the first
    violated axiom with a witness.
    """
    pts = list(points)
    n = len(pts)
    if isinstance(distances, dict):
        table = {}
        for (a, b), v in distances.items():
            table[(a, b)] = table[(b, a)] = _exact(v)
        rows = []
        for a in pts:
            row = []
            for b in pts:
                if a == b:
                    row.append(table.get((a, b), Fraction(0)))
                    continue
                if (a, b) not in table:
                    raise MalformedInputError(f"missing distance for pair ({a!r}, {b!r})")
                row.append(table[(a, b)])
            rows.append(row)
    else:
        rows = [[_exact(_to_number(v)) for v in row] for row in distances]
        if len(rows) != n or any(len(r) != n for r in rows):
            raise MalformedInputError("distance matrix has the wrong shape")
    for i in range(n):
        for j in range(n):
            if rows[i][j] < 0:
                raise MalformedInputError(f"negative distance between {pts[i]!r} and {pts[j]!r}")
    for i in range(n):
        if rows[i][i] != 0:
            return {"ok": False, "violation": "identity", "witness": [pts[i]]}
        for j in range(i + 1, n):
            if rows[i][j] != rows[j][i]:
                return {"ok": False, "violation": "symmetry", "witness": [pts[i], pts[j]]}
            if rows[i][j] == 0:
                return {"ok": False, "violation": "identity", "witness": [pts[i], pts[j]]}
    for i, j, k in itertools.product(range(n), repeat=3):
        if rows[i][k] > rows[i][j] + rows[j][k]:
            return {"ok": False, "violation": "triangle", "witness": [pts[i], pts[j], pts[k]]}
    return {"ok": True, "violation": None, "witness": None}


def ball(space: FilteredMetricSpace, x, R) -> frozenset:
    """Closed ball ``{y : d(x, y) <= R}`` as a set of labels."""
    if R < 0:
        raise PreconditionError("radius must be nonnegative")
    i = space.index_of(x)
    return frozenset(space.points[j] for j in space.ball_indices(i, R))


def bounded_geometry_profile(space: FilteredMetricSpace, R):
    """``max_x |ball(x, R)|`` together with the first point attaining it."""
    if R < 0:
        raise PreconditionError("radius must be nonnegative")
    best, arg = -1, None
    for i in range(len(space)):
        size = int(_le(space.dist[i], R).sum())
        if size > best:
            best, arg = size, space.points[i]
    return best, arg


def uniform_discreteness_gap(space: FilteredMetricSpace):
    if len(space) < 2:
        raise PreconditionError("the gap of a space with fewer than two points is undefined")
    d = space.dist
    off = ~np.eye(len(space), dtype=bool)
    if d.dtype != object:
        return int(d[off].min())
    return min(d[off].tolist())


@dataclass(frozen=True, eq=False)
class Cover:
    """An indexed family of subsets whose union is the whole space."""

    space: FilteredMetricSpace
    members: tuple

    def __post_init__(self):
        mem = tuple(frozenset(int(i) for i in m) for m in self.members)
        object.__setattr__(self, "members", mem)
        if not mem:
            raise MalformedInputError("a cover needs at least one member")
        n = len(self.space)
        seen = set()
        for k, m in enumerate(mem):
            if not m:
                raise MalformedInputError(f"cover member {k} is empty")
            if any(i < 0 or i >= n for i in m):
                raise MalformedInputError(f"cover member {k} has indices outside the space")
            seen |= m
        if len(seen) != n:
            missing = sorted(set(range(n)) - seen)
            raise MalformedInputError(f"cover misses point {self.space.points[missing[0]]!r}")

    @classmethod
    def from_points(cls, space: FilteredMetricSpace, members: Iterable[Iterable[Hashable]]):
        return cls(space, tuple(frozenset(space.index_of(p) for p in m) for m in members))

    def __len__(self):
        return len(self.members)

    def member_labels(self, k: int) -> frozenset:
        return frozenset(self.space.points[i] for i in self.members[k])

    @cached_property
    def masks(self) -> np.ndarray:
        out = np.zeros((len(self.members), len(self.space)), dtype=bool)
        for k, m in enumerate(self.members):
            out[k, list(m)] = True
        return out

    @cached_property
    def containing(self) -> list:
        """For each point index, the sorted member indices containing it."""
        return [list(np.flatnonzero(self.masks[:, i])) for i in range(len(self.space))]

    def to_json(self, space_ref="space") -> dict:
        return {
            "space": space_ref,
            "members": [[self.space.points[i] for i in sorted(m)] for m in self.members],
        }


def cover_diameter(cover: Cover):
    return max(cover.space.diameter_of(m) for m in cover.members)


def _ball_fits(cover: Cover, i: int, R) -> bool:
    b = _le(cover.space.dist[i], R)
    cands = cover.containing[i]
    sub = cover.masks[cands][:, b]
    return bool(sub.all(axis=1).any())


def lebesgue_lower_bound(cover: Cover):
    """Largest realized distance ``R`` such that every closed ``R``-ball lies in a member.

    This bounds the subset-quantified Lebesgue number from below, because a set
    of diameter ``R`` containing ``x`` lies in ``ball(x, R)``.
    """
    space = cover.space
    cands = space.realized_distances

    def ok(R):
        return all(_ball_fits(cover, i, R) for i in range(len(space)))

    lo, hi = 0, len(cands) - 1  # cands[0] == 0 always fits
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if ok(cands[mid]):
            lo = mid
        else:
            hi = mid - 1
    return cands[lo]


def lebesgue_exact(cover: Cover, max_points: int = 20):
    """Exact Lebesgue number over realized distances, for small spaces.

    A set of diameter ``<= R`` is a clique of the threshold graph ``d <= R``;
    if every maximal clique lies in a member so does every such set, so the
    maximal cliques are the only subsets that need checking.
    """
    space = cover.space
    n = len(space)
    if n > max_points:
        raise CapacityError(
            f"lebesgue_exact is capped at {max_points} points (got {n}); use lebesgue_lower_bound"
        )
    member_sets = [set(m) for m in cover.members]

    def ok(R):
        g = nx.Graph()
        g.add_nodes_from(range(n))
        for i in range(n):
            for j in np.flatnonzero(_le(space.dist[i], R)):
                if j > i:
                    g.add_edge(i, int(j))
        for clique in nx.find_cliques(g):
            c = set(clique)
            if not any(c <= m for m in member_sets):
                return False
        return True

    best = 0
    for R in space.realized_distances:
        if ok(R):
            best = R
        else:
            break
    return best


def r_degree(cover: Cover, R):
    """``sup_w #{U : d(w, U) < R}`` with a point attaining it."""
    if R <= 0:
        raise PreconditionError("R-degree needs R > 0")
    best, arg = 0, None
    masks = cover.masks
    for i in range(len(cover.space)):
        near = _lt(cover.space.dist[i], R)
        count = int(masks[:, near].any(axis=1).sum())
        if count > best:
            best, arg = count, cover.space.points[i]
    return best, arg


def degree(cover: Cover) -> int:
    return int(cover.masks.sum(axis=0).max())


def _same_space(c1: Cover, c2: Cover):
    if c1.space is not c2.space and c1.space.points != c2.space.points:
        raise PreconditionError("covers live on different spaces")


def refines(c1: Cover, c2: Cover) -> bool:
    """``c1 ≼ c2``: every member of ``c1`` lies inside some member of ``c2``."""
    _same_space(c1, c2)
    return all(any(m1 <= m2 for m2 in c2.members) for m1 in c1.members)


def net_cover(space: FilteredMetricSpace, R) -> Cover:
    """Closed ``R``-balls about a greedy ``R``-net, visiting points in listed order."""
    centers = []
    covered = np.zeros(len(space), dtype=bool)
    for i in range(len(space)):
        if not covered[i]:
            centers.append(i)
            covered |= _le(space.dist[i], R)
    return Cover(space, tuple(frozenset(space.ball_indices(c, R).tolist()) for c in centers))


@dataclass(frozen=True, eq=False)
class AntiCechSequence:
    covers: tuple
    radii: tuple
    certificate: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "radii": [to_json(r) for r in self.radii],
            "covers": [c.to_json() for c in self.covers],
            "certificate": self.certificate,
        }


def build_anticech(space: FilteredMetricSpace, schedule: Sequence, max_retries: int = 6) -> AntiCechSequence:
    """Net covers at the scheduled radii, certified against the anti-Čech chain condition.

    Whenever ``Diam(U_i) <= Lebesgue(U_{i+1})`` fails, the radius of step
    ``i+1`` is doubled and the step retried.
    """
    sched = [as_fraction(r) for r in schedule]
    if not sched:
        raise PreconditionError("empty schedule")
    if any(r <= 0 for r in sched) or any(a >= b for a, b in zip(sched, sched[1:])):
        raise PreconditionError("schedule must be positive and strictly increasing")
    covers, radii, cert = [], [], []
    for step, R in enumerate(sched):
        r = R
        for attempt in range(max_retries + 1):
            cover = net_cover(space, r)
            if not covers:
                break
            diam = cover_diameter(covers[-1])
            leb = lebesgue_lower_bound(cover)
            if diam <= leb:
                cert.append({
                    "step": step,
                    "inequality": f"Diam(U_{step}) <= Lebesgue(U_{step + 1})",
                    "diameter": to_json(diam),
                    "lebesgue": to_json(leb),
                    "lebesgue_method": "ball_lower_bound",
                    "radius": to_json(r),
                    "retries": attempt,
                    "holds": True,
                })
                break
            r = r * 2
        else:
            raise ConstructionError(
                f"anti-Čech step {step} failed after {max_retries} retries",
                {"violating_step": step, "diameter": to_json(diam), "lebesgue": to_json(leb), "radius": to_json(r)},
            )
        covers.append(cover)
        radii.append(r)
    return AntiCechSequence(tuple(covers), tuple(radii), cert)


def _brick_index(p, side: Fraction, n: int) -> tuple:
    coords = (p,) if n == 1 else tuple(p)
    if n == 1:
        return (math.floor(Fraction(coords[0]) / side),)
    if n == 2:
        x, y = coords
        by = math.floor(Fraction(y) / side)
        bx = math.floor((x + (by % 2) * side / 2) / side)
        return (bx, by)
    x, y, z = coords
    bz = math.floor(Fraction(z) / side)
    by = math.floor((y + (bz % 2) * side / 2) / side)
    bx = math.floor((x + (by % 2) * side / 2 + (bz % 2) * side / 4) / side)
    return (bx, by, bz)


def brick_cover(space: FilteredMetricSpace, R, side=None, n: int | None = None, check: bool = True) -> Cover:
    """Partition a truncation of ``Z^n`` into offset bricks of the given side.

    Adjacent rows (and layers) are staggered so that no point is close to more
    than ``n + 1`` bricks once ``side`` is large compared to ``R``.  With
    ``check`` set, the ``R``-degree is measured and a violation raises
    :class:`PostconditionError` carrying the measured degree.
    """
    if n is None:
        first = space.points[0]
        n = 1 if isinstance(first, int) else len(first)
    if n not in (1, 2, 3):
        raise PreconditionError(f"brick covers are implemented for n in {{1, 2, 3}}, not {n}")
    R = as_fraction(R)
    if R <= 0:
        raise PreconditionError("R must be positive")
    side = as_fraction(side) if side is not None else {1: 2, 2: 4, 3: 8}[n] * R
    groups: dict = {}
    for i, p in enumerate(space.points):
        groups.setdefault(_brick_index(p, side, n), []).append(i)
    cover = Cover(space, tuple(frozenset(groups[k]) for k in sorted(groups)))
    if check:
        deg, at = r_degree(cover, R)
        if deg > n + 1:
            raise PostconditionError(
                f"brick cover has R-degree {deg} > {n + 1} at {at!r}; enlarge the bricks",
                {"r_degree": deg, "witness": at, "side": to_json(side), "R": to_json(R)},
            )
    return cover


def vertex_assignment(cover: Cover) -> dict:
    """Send each point to the smallest index of a member containing it."""
    return {p: int(cover.containing[i][0]) for i, p in enumerate(cover.space.points)}
