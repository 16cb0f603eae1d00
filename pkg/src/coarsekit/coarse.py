"""Entourages, control classifiers, coarse-map profiles and excisiveness.

Asymptotic conditions ("outside some compact set", "as i tends to infinity")
are evaluated against a finite filtration together with a caller-supplied
tolerance schedule; every verdict carries its full profile and a witness.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import MalformedInputError, PreconditionError
from .exact import as_fraction, to_json
from .spaces import FilteredMetricSpace, _le

__all__ = [
    "Entourage",
    "ControlProfile",
    "Verdict",
    "PointMap",
    "diagonal",
    "band",
    "bounded_bound",
    "control_profile",
    "classify_c0",
    "classify_fusion",
    "classify_hybrid",
    "level_profile",
    "properness_profile",
    "bornologous_profile",
    "closeness",
    "thickening",
    "excisive_profile",
]


@dataclass(frozen=True, eq=False)
class Entourage:
    """A set of ordered point pairs, stored as index pairs."""

    space: FilteredMetricSpace
    pairs: frozenset

    def __post_init__(self):
        n = len(self.space)
        pairs = frozenset((int(a), int(b)) for a, b in self.pairs)
        for a, b in pairs:
            if not (0 <= a < n and 0 <= b < n):
                raise MalformedInputError(f"pair ({a}, {b}) lies outside the space")
        object.__setattr__(self, "pairs", pairs)

    @classmethod
    def from_labels(cls, space: FilteredMetricSpace, pairs: Iterable) -> "Entourage":
        return cls(space, frozenset((space.index_of(a), space.index_of(b)) for a, b in pairs))

    def labels(self) -> list:
        pts = self.space.points
        return sorted(((pts[a], pts[b]) for a, b in self.pairs), key=repr)

    def __eq__(self, other):
        return isinstance(other, Entourage) and self.space is other.space and self.pairs == other.pairs

    def __hash__(self):
        return hash(self.pairs)

    def __len__(self):
        return len(self.pairs)

    def _check(self, other: "Entourage"):
        if self.space is not other.space and self.space.points != other.space.points:
            raise PreconditionError("entourages live on different spaces")

    def union(self, other: "Entourage") -> "Entourage":
        self._check(other)
        return Entourage(self.space, self.pairs | other.pairs)

    def inverse(self) -> "Entourage":
        return Entourage(self.space, frozenset((b, a) for a, b in self.pairs))

    def compose(self, other: "Entourage") -> "Entourage":
        """``E ∘ F = {(x, y) : (x, z) ∈ E and (z, y) ∈ F for some z}``."""
        self._check(other)
        out_of: dict = {}
        for z, y in other.pairs:
            out_of.setdefault(z, []).append(y)
        return Entourage(self.space, frozenset((x, y) for x, z in self.pairs for y in out_of.get(z, ())))


def diagonal(space: FilteredMetricSpace) -> Entourage:
    return Entourage(space, frozenset((i, i) for i in range(len(space))))


def band(space: FilteredMetricSpace, R) -> Entourage:
    """All pairs at distance at most ``R``."""
    pairs = set()
    for i in range(len(space)):
        pairs.update((i, int(j)) for j in space.ball_indices(i, R))
    return Entourage(space, frozenset(pairs))


def _max_pair(space: FilteredMetricSpace, pairs):
    best, arg = 0, None
    for a, b in pairs:
        d = space.di(a, b)
        if arg is None or d > best:
            best, arg = d, (a, b)
    return best, arg


def bounded_bound(E: Entourage):
    return _max_pair(E.space, E.pairs)[0]


@dataclass(frozen=True)
class ControlProfile:
    """``s_i``: the largest distance among pairs not inside ``K_i × K_i``."""

    values: tuple
    witnesses: tuple  # index pair attaining s_i, or None

    def to_json(self, space: FilteredMetricSpace | None = None) -> dict:
        def w(p):
            if p is None or space is None:
                return None if p is None else list(p)
            return [space.points[p[0]], space.points[p[1]]]

        return {"s": [to_json(v) for v in self.values], "witnesses": [w(p) for p in self.witnesses]}


def control_profile(E: Entourage, filtration: Sequence | None = None) -> ControlProfile:
    filt = E.space.filtration if filtration is None else filtration
    values, witnesses = [], []
    for K in filt:
        outside = [(a, b) for a, b in E.pairs if a not in K or b not in K]
        v, arg = _max_pair(E.space, outside)
        values.append(v)
        witnesses.append(arg)
    return ControlProfile(tuple(values), tuple(witnesses))


@dataclass
class Verdict:
    passed: bool
    profile: tuple
    schedule: tuple
    witness: dict | None = None
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {
            "passed": self.passed,
            "profile": [to_json(v) for v in self.profile],
            "schedule": [to_json(v) for v in self.schedule],
            "witness": self.witness,
            "certificate": [
                {"index": i + 1, "inequality": "s_i <= eps_i", "s": to_json(s), "eps": to_json(e), "holds": s <= e}
                for i, (s, e) in enumerate(zip(self.profile, self.schedule))
            ],
        }
        out.update(self.extra)
        return out


def _schedule(schedule) -> tuple:
    sched = tuple(as_fraction(e) if not isinstance(e, float) else e for e in schedule)
    if any(e <= 0 for e in sched):
        raise PreconditionError("tolerances must be positive")
    return sched


def _judge(space, profile: ControlProfile, sched: tuple, offset: int = 0) -> Verdict:
    for i, (s, e) in enumerate(zip(profile.values, sched)):
        if not s <= e:
            a, b = profile.witnesses[i]
            witness = {"index": i + 1 + offset, "pair": [space.points[a], space.points[b]], "distance": to_json(s), "tolerance": to_json(e)}
            return Verdict(False, profile.values, sched, witness)
    return Verdict(True, profile.values, sched)


def classify_c0(E: Entourage, schedule: Sequence) -> Verdict:
    """Pass iff ``s_i <= eps_i`` at every filtration index."""
    sched = _schedule(schedule)
    if len(sched) != len(E.space.filtration):
        raise PreconditionError(
            f"schedule has {len(sched)} tolerances but the filtration has {len(E.space.filtration)} sets"
        )
    return _judge(E.space, control_profile(E), sched)


def _partials(space: FilteredMetricSpace, levels: Mapping) -> list:
    """``X_i`` for ``i = 1..L`` as index sets."""
    try:
        lv = [int(levels[p]) for p in space.points]
    except KeyError as exc:
        raise PreconditionError(f"point {exc.args[0]!r} has no level") from None
    if min(lv) < 1:
        raise PreconditionError("levels start at 1")
    top = max(lv)
    return [frozenset(k for k, l in enumerate(lv) if l <= i) for i in range(1, top + 1)]


def classify_fusion(E: Entourage, levels: Mapping, schedule: Sequence, max_cut: int | None = None) -> Verdict:
    """Smallest cut ``i`` such that the pairs outside ``X_i × X_i`` pass the C0 test.

    At the top level nothing lies outside, so cuts are searched only up to
    ``max_cut`` (default: one below the top level).
    """
    sched = _schedule(schedule)
    parts = _partials(E.space, levels)
    top = len(parts)
    max_cut = max(1, top - 1) if max_cut is None else max_cut
    bound = bounded_bound(E)
    last = None
    for cut in range(1, max_cut + 1):
        X = parts[cut - 1]
        tail = Entourage(E.space, frozenset((a, b) for a, b in E.pairs if a not in X or b not in X))
        verdict = classify_c0(tail, sched)
        if verdict.passed:
            verdict.extra = {"cut": cut, "bounded_bound": to_json(bound)}
            return verdict
        last = verdict
    last.extra = {"cut": None, "bounded_bound": to_json(bound)}
    return last


def level_profile(E: Entourage, levels: Mapping) -> ControlProfile:
    """``h_i``: the largest distance among pairs not inside ``X_i × X_i``."""
    return control_profile(E, _partials(E.space, levels))


def classify_hybrid(E: Entourage, levels: Mapping, schedule: Sequence, start_level: int = 1) -> Verdict:
    """Pass iff ``h_i <= eps_i`` for every level ``i >= start_level``.

    ``start_level`` stands in for "for all sufficiently large i".
    """
    sched = _schedule(schedule)
    prof = level_profile(E, levels)
    if len(sched) != len(prof.values):
        raise PreconditionError(f"schedule has {len(sched)} tolerances for {len(prof.values)} levels")
    k = start_level - 1
    tail = ControlProfile(prof.values[k:], prof.witnesses[k:])
    v = _judge(E.space, tail, sched[k:], offset=k)
    v.profile, v.schedule = prof.values, sched
    v.extra = {"start_level": start_level}
    return v


@dataclass(frozen=True, eq=False)
class PointMap:
    """A total map between finite spaces, stored as target indices."""

    source: FilteredMetricSpace
    target: FilteredMetricSpace
    values: tuple

    def __post_init__(self):
        vals = tuple(int(v) for v in self.values)
        if len(vals) != len(self.source):
            raise MalformedInputError("point map is not total")
        if any(v < 0 or v >= len(self.target) for v in vals):
            raise MalformedInputError("point map leaves the target")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_dict(cls, source, target, mapping: Mapping) -> "PointMap":
        try:
            return cls(source, target, tuple(target.index_of(mapping[p]) for p in source.points))
        except KeyError as exc:
            raise MalformedInputError(f"point map is not total: {exc.args[0]!r}") from None

    @classmethod
    def identity(cls, space) -> "PointMap":
        return cls(space, space, tuple(range(len(space))))

    def __call__(self, x):
        return self.target.points[self.values[self.source.index_of(x)]]

    def then(self, other: "PointMap") -> "PointMap":
        """``other ∘ self``."""
        if other.source is not self.target:
            raise PreconditionError("maps do not compose")
        return PointMap(self.source, other.target, tuple(other.values[v] for v in self.values))


def properness_profile(f: PointMap, radii: Sequence | None = None) -> list:
    """``(R, max diam f⁻¹(ball(y, R)))`` for each radius."""
    radii = f.target.realized_distances if radii is None else radii
    vals = np.array(f.values, dtype=np.int64)
    out = []
    for R in radii:
        worst = 0
        for y in range(len(f.target)):
            near = _le(f.target.dist[y], R)
            pre = np.flatnonzero(near[vals])
            if len(pre):
                d = f.source.diameter_of(pre)
                worst = max(worst, d)
        out.append((R, worst))
    return out


def bornologous_profile(f: PointMap, radii: Sequence | None = None) -> list:
    """``(R, sup{d(fx, fx') : d(x, x') <= R})`` over realized source distances."""
    radii = f.source.realized_distances if radii is None else radii
    idx = np.array(f.values, dtype=np.int64)
    img = f.target.dist[np.ix_(idx, idx)]
    src = f.source.dist
    out = []
    for R in radii:
        mask = np.zeros(src.shape, dtype=bool)
        for i in range(len(f.source)):
            mask[i] = _le(src[i], R)
        sel = img[mask]
        out.append((R, max(sel.tolist()) if sel.size else 0))
    return out


def closeness(f: PointMap, g: PointMap):
    """``sup_x d(f x, g x)`` with an attaining point."""
    if f.source is not g.source or f.target is not g.target:
        if f.source.points != g.source.points or f.target.points != g.target.points:
            raise PreconditionError("maps have different sources or targets")
    best, arg = 0, None
    for i, (a, b) in enumerate(zip(f.values, g.values)):
        d = f.target.di(a, b)
        if arg is None or d > best:
            best, arg = d, f.source.points[i]
    return best, arg


def thickening(space: FilteredMetricSpace, idx, R) -> np.ndarray:
    """Boolean mask of ``{x : d(x, Y) <= R}``."""
    idx = list(idx)
    mask = np.zeros(len(space), dtype=bool)
    for i in idx:
        mask |= _le(space.dist[i], R)
    return mask


def excisive_profile(space: FilteredMetricSpace, E, F, scales: Sequence) -> dict:
    """For each ``R``, the least ``S`` with ``E_R ∩ F_R ⊆ (E ∩ F)_S`` or ``"fail"``."""
    e = {space.index_of(p) for p in E}
    f = {space.index_of(p) for p in F}
    if len(e | f) != len(space):
        raise PreconditionError("E and F do not cover the space")
    inter = sorted(e & f)
    out = {}
    for R in scales:
        both = np.flatnonzero(thickening(space, e, R) & thickening(space, f, R))
        if len(both) == 0:
            out[R] = 0
        elif not inter:
            out[R] = "fail"
        else:
            sub = space.dist[np.ix_(both, inter)]
            out[R] = max(min(row) for row in sub.tolist())
    return out
