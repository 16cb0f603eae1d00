"""Simplicial complexes, nerves, subdivision and the uniform spherical metric.

Vertices are opaque hashable labels.  Subdivided complexes label a new vertex
by the simplex (a frozenset of old vertices) whose barycenter it is, so the
depth-2 subdivision has frozensets of frozensets as labels.
"""
from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Hashable, Iterable, Mapping

import networkx as nx

from .errors import CapacityError, MalformedInputError, PreconditionError
from .exact import FLOAT_TOL, PiRational, as_fraction, to_json
from .spaces import Cover, refines

__all__ = [
    "label_key",
    "SimplicialComplex",
    "SimplicialMap",
    "SphericalComplex",
    "BarycentricPoint",
    "Subdivision",
    "DistanceInterval",
    "StarsDecomposition",
    "nerve",
    "connecting_map",
    "barycentric_subdivision",
    "vertex_distance",
    "point_distance",
    "spherical_angle",
    "star",
    "stars_decomposition",
    "one_skeleton_union",
    "distortion",
    "relatively_connected",
    "nerve_projection",
]

MAX_SUBDIVISION_DIM = 4
MAX_DECOMPOSITION_DIM = 3
MAX_DEPTH = 3


def label_key(v):
    """Total order on the labels used here: ints, tuples, strings, nested frozensets."""
    if isinstance(v, bool):
        return (0, int(v))
    if isinstance(v, int):
        return (0, v)
    if isinstance(v, Fraction):
        return (0, v)
    if isinstance(v, str):
        return (1, v)
    if isinstance(v, tuple):
        return (2, tuple(label_key(x) for x in v))
    if isinstance(v, frozenset):
        return (3, len(v), tuple(sorted(label_key(x) for x in v)))
    return (4, repr(v))


def label_json(v):
    """JSON rendering of a (possibly nested) label."""
    if isinstance(v, frozenset):
        return [label_json(x) for x in sorted(v, key=label_key)]
    if isinstance(v, tuple):
        return [label_json(x) for x in v]
    return v


def _closure(simplices: Iterable[Iterable]) -> frozenset:
    out = set()
    for s in simplices:
        s = frozenset(s)
        if not s or s in out:
            continue
        items = tuple(s)
        for k in range(1, len(items) + 1):
            for face in itertools.combinations(items, k):
                out.add(frozenset(face))
    return frozenset(out)


@dataclass(frozen=True, eq=False)
class SimplicialComplex:
    """A finite abstract simplicial complex stored as its full face set."""

    vertices: tuple
    simplices: frozenset

    def __post_init__(self):
        verts = tuple(sorted(set(self.vertices), key=label_key))
        object.__setattr__(self, "vertices", verts)
        vset = set(verts)
        for s in self.simplices:
            if not s:
                raise MalformedInputError("empty simplex")
            if not s <= vset:
                raise MalformedInputError(f"simplex {sorted(s, key=label_key)!r} uses unknown vertices")
        for v in verts:
            if frozenset((v,)) not in self.simplices:
                raise MalformedInputError(f"vertex {v!r} is not a 0-simplex")

    @classmethod
    def from_simplices(cls, simplices: Iterable[Iterable], vertices: Iterable = ()) -> "SimplicialComplex":
        faces = set(_closure(simplices))
        verts = set(vertices)
        faces |= {frozenset((v,)) for v in verts}
        for s in faces:
            verts |= s
        return cls(tuple(verts), frozenset(faces))

    @classmethod
    def empty(cls) -> "SimplicialComplex":
        return cls((), frozenset())

    def __len__(self):
        return len(self.simplices)

    def __contains__(self, simplex):
        return frozenset(simplex) in self.simplices

    def __eq__(self, other):
        return isinstance(other, SimplicialComplex) and self.simplices == other.simplices

    def __hash__(self):
        return hash(self.simplices)

    @cached_property
    def dim(self) -> int:
        return max((len(s) for s in self.simplices), default=0) - 1

    def simplices_of_dim(self, k: int) -> list:
        return sorted((s for s in self.simplices if len(s) == k + 1), key=label_key)

    @cached_property
    def maximal(self) -> list:
        out = []
        by_size = sorted(self.simplices, key=len, reverse=True)
        for s in by_size:
            if not any(s < m for m in out):
                out.append(s)
        return sorted(out, key=label_key)

    @cached_property
    def edges(self) -> list:
        return self.simplices_of_dim(1)

    @cached_property
    def graph(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(self.vertices)
        g.add_edges_from(tuple(e) for e in self.edges)
        return g

    @cached_property
    def components(self) -> list:
        return sorted(
            (frozenset(c) for c in nx.connected_components(self.graph)),
            key=lambda c: label_key(min(c, key=label_key)),
        )

    @cached_property
    def component_of(self) -> dict:
        return {v: k for k, comp in enumerate(self.components) for v in comp}

    def is_subcomplex_of(self, other: "SimplicialComplex") -> bool:
        return self.simplices <= other.simplices

    def union(self, other: "SimplicialComplex") -> "SimplicialComplex":
        return SimplicialComplex(self.vertices + other.vertices, self.simplices | other.simplices)

    def intersection(self, other: "SimplicialComplex") -> "SimplicialComplex":
        faces = self.simplices & other.simplices
        return SimplicialComplex(tuple({v for s in faces for v in s}), faces)

    def skeleton(self, k: int) -> "SimplicialComplex":
        faces = frozenset(s for s in self.simplices if len(s) <= k + 1)
        return SimplicialComplex(self.vertices, faces)

    def full_subcomplex(self, verts) -> "SimplicialComplex":
        verts = frozenset(verts)
        faces = frozenset(s for s in self.simplices if s <= verts)
        return SimplicialComplex(tuple(verts), faces)

    def to_json(self) -> dict:
        return {
            "vertices": [label_json(v) for v in self.vertices],
            "maximal_simplices": [label_json(s) for s in self.maximal],
        }


@dataclass(frozen=True, eq=False)
class SimplicialMap:
    source: SimplicialComplex
    target: SimplicialComplex
    vertex_map: Mapping

    def __post_init__(self):
        vm = dict(self.vertex_map)
        object.__setattr__(self, "vertex_map", vm)
        missing = [v for v in self.source.vertices if v not in vm]
        if missing:
            raise MalformedInputError(f"vertex map is not total: {missing[0]!r} has no image")

    def __call__(self, v):
        return self.vertex_map[v]

    def image(self, simplex) -> frozenset:
        return frozenset(self.vertex_map[v] for v in simplex)

    def violation(self):
        """First simplex whose image is not a simplex of the target, or None."""
        for s in sorted(self.source.simplices, key=label_key):
            if self.image(s) not in self.target.simplices:
                return s
        return None

    def is_simplicial(self) -> bool:
        return self.violation() is None

    def compose(self, other: "SimplicialMap") -> "SimplicialMap":
        """``other ∘ self``."""
        return SimplicialMap(self.source, other.target, {v: other(self(v)) for v in self.source.vertices})

    def to_json(self) -> dict:
        return {"vertex_map": {str(label_json(k)): label_json(v) for k, v in sorted(self.vertex_map.items(), key=lambda kv: label_key(kv[0]))}}


def nerve(cover: Cover) -> SimplicialComplex:
    """Members are vertices; a set of members spans a simplex iff they share a point."""
    faces = set()
    for members in cover.containing:
        key = frozenset(int(k) for k in members)
        if key not in faces:
            faces |= _closure([key])
    return SimplicialComplex(tuple(range(len(cover))), frozenset(faces))


def connecting_map(c1: Cover, c2: Cover) -> SimplicialMap:
    """Send each member of ``c1`` to the smallest-index member of ``c2`` containing it."""
    vm = {}
    for k, m in enumerate(c1.members):
        target = next((j for j, u in enumerate(c2.members) if m <= u), None)
        if target is None:
            raise PreconditionError(f"cover member {k} of the finer cover lies in no member of the coarser one")
        vm[k] = target
    f = SimplicialMap(nerve(c1), nerve(c2), vm)
    bad = f.violation()
    if bad is not None:  # cannot happen for a refinement; kept as a certificate
        raise PreconditionError(f"connecting map is not simplicial on {sorted(bad)}")
    return f


@dataclass(frozen=True)
class BarycentricPoint:
    """A point of a complex given by nonnegative weights on the vertices of a simplex."""

    weights: tuple  # sorted (vertex, Fraction) pairs with positive weight

    def __post_init__(self):
        w = {}
        for v, x in dict(self.weights).items():
            x = as_fraction(x)
            if x < 0:
                raise MalformedInputError("barycentric weights must be nonnegative")
            if x:
                w[v] = x
        if sum(w.values()) != 1:
            raise MalformedInputError("barycentric weights must sum to 1")
        object.__setattr__(self, "weights", tuple(sorted(w.items(), key=lambda kv: label_key(kv[0]))))

    @classmethod
    def vertex(cls, v) -> "BarycentricPoint":
        return cls(((v, Fraction(1)),))

    @classmethod
    def barycenter(cls, simplex) -> "BarycentricPoint":
        s = list(simplex)
        return cls(tuple((v, Fraction(1, len(s))) for v in s))

    @property
    def carrier(self) -> frozenset:
        return frozenset(v for v, _ in self.weights)

    def as_dict(self) -> dict:
        return dict(self.weights)

    def push(self, f: SimplicialMap) -> "BarycentricPoint":
        """Image under the affine extension of a simplicial map."""
        out: dict = {}
        for v, x in self.weights:
            out[f(v)] = out.get(f(v), Fraction(0)) + x
        return BarycentricPoint(tuple(out.items()))

    def is_vertex(self) -> bool:
        return len(self.weights) == 1

    def to_json(self):
        return {str(label_json(v)): to_json(x) for v, x in self.weights}


_SPECIAL_COS2 = {
    Fraction(1): PiRational.quarter(0),
    Fraction(3, 4): PiRational.quarter(Fraction(1, 3)),
    Fraction(1, 2): PiRational.quarter(Fraction(1, 2)),
    Fraction(1, 4): PiRational.quarter(Fraction(2, 3)),
    Fraction(0): PiRational.quarter(1),
}


def spherical_angle(p: Mapping, q: Mapping):
    """Angle between the radial projections of two weight vectors on one simplex.

    Exact (a :class:`PiRational`) when the squared cosine is one of the
    rational values of a rational multiple of a quarter turn; a float otherwise.
    """
    dot = sum(x * q.get(v, 0) for v, x in p.items())
    pp = sum(x * x for x in p.values())
    qq = sum(x * x for x in q.values())
    cos2 = Fraction(dot * dot) / (pp * qq)
    if cos2 in _SPECIAL_COS2:
        return _SPECIAL_COS2[cos2]
    return math.acos(min(1.0, math.sqrt(float(cos2))))


@dataclass(frozen=True, eq=False)
class Subdivision:
    """An iterated barycentric subdivision with carriers and positions in the base."""

    base: SimplicialComplex
    depth: int
    complex: SimplicialComplex
    position: dict  # new vertex -> {base vertex: weight}

    def carrier(self, v) -> frozenset:
        """Smallest base simplex containing the new vertex."""
        return frozenset(self.position[v])

    def vertex_for(self, simplex) -> Hashable:
        """Label of the barycenter of a base simplex at this depth."""
        label = frozenset(simplex)
        for _ in range(self.depth - 1):
            label = frozenset((label,))
        return label


def _subdivide_once(K: SimplicialComplex) -> SimplicialComplex:
    tops = []
    for m in K.maximal:
        for perm in itertools.permutations(sorted(m, key=label_key)):
            tops.append(frozenset(frozenset(perm[: i + 1]) for i in range(len(perm))))
    return SimplicialComplex.from_simplices(tops, vertices=K.simplices)


def barycentric_subdivision(K: SimplicialComplex, n: int = 1) -> Subdivision:
    if n < 1:
        raise PreconditionError("subdivision depth must be at least 1")
    if n > MAX_DEPTH:
        raise CapacityError(f"subdivision depth is capped at {MAX_DEPTH}")
    if K.dim > MAX_SUBDIVISION_DIM:
        raise CapacityError(f"subdivision is capped at dimension {MAX_SUBDIVISION_DIM}")
    position = {v: {v: Fraction(1)} for v in K.vertices}
    current = K
    for _ in range(n):
        nxt = _subdivide_once(current)
        new_pos = {}
        for s in nxt.vertices:
            acc: dict = {}
            for v in s:
                for b, x in position[v].items():
                    acc[b] = acc.get(b, Fraction(0)) + x / len(s)
            new_pos[s] = acc
        position, current = new_pos, nxt
    return Subdivision(K, n, current, position)


@dataclass(frozen=True, eq=False)
class SphericalComplex:
    """A complex with every m-simplex carrying the spherical m-simplex metric."""

    complex: SimplicialComplex
    separation: object = math.inf

    @cached_property
    def _bfs(self) -> dict:
        return {}

    def hops(self, v, w):
        """1-skeleton graph distance, or None across components."""
        if v not in self.complex.graph or w not in self.complex.graph:
            raise PreconditionError(f"unknown vertex {v if v not in self.complex.graph else w!r}")
        cache = self._bfs
        if v not in cache:
            cache[v] = nx.single_source_shortest_path_length(self.complex.graph, v)
        return cache[v].get(w)

    @cached_property
    def _subdivisions(self) -> dict:
        return {}

    def subdivision(self, depth: int) -> Subdivision:
        if depth not in self._subdivisions:
            self._subdivisions[depth] = barycentric_subdivision(self.complex, depth)
        return self._subdivisions[depth]


def _as_complex(K) -> SimplicialComplex:
    return K.complex if isinstance(K, SphericalComplex) else K


def vertex_distance(sc: SphericalComplex, v, w):
    """Quarter turns times the hop count; ``inf`` across components."""
    h = sc.hops(v, w)
    return math.inf if h is None else PiRational.quarter(h)


@dataclass(frozen=True)
class DistanceInterval:
    lo: object
    hi: object
    exact: bool

    def contains(self, value, tol: float = FLOAT_TOL) -> bool:
        if isinstance(value, float) and math.isinf(value):
            return isinstance(self.hi, float) and math.isinf(self.hi)
        return float(self.lo) - tol <= float(value) <= float(self.hi) + tol

    def to_json(self) -> dict:
        return {"lo": to_json(self.lo), "hi": to_json(self.hi), "exact": self.exact}


def _check_point(sc: SphericalComplex, p: BarycentricPoint):
    if p.carrier not in sc.complex.simplices:
        raise PreconditionError(f"point carrier {sorted(p.carrier, key=label_key)!r} is not a simplex")


def _subdivision_upper(sc: SphericalComplex, p: BarycentricPoint, q: BarycentricPoint, depth: int) -> float:
    """Length of a shortest path through the depth-``depth`` subdivision graph.

    Each subdivision edge lies in one simplex of the base, so its spherical
    length is exact there; ``p`` and ``q`` join every subdivision vertex that
    shares a base simplex with them.
    """
    sd = sc.subdivision(depth)
    K = sc.complex
    g = nx.Graph()
    for e in sd.complex.edges:
        a, b = tuple(e)
        g.add_edge(a, b, weight=float(spherical_angle(sd.position[a], sd.position[b])))
    src, dst = ("__p__",), ("__q__",)
    for tag, pt in ((src, p), (dst, q)):
        w = pt.as_dict()
        g.add_node(tag)
        for v in sd.complex.vertices:
            if (pt.carrier | sd.carrier(v)) in K.simplices:
                g.add_edge(tag, v, weight=float(spherical_angle(w, sd.position[v])))
    try:
        return nx.dijkstra_path_length(g, src, dst, weight="weight")
    except nx.NetworkXNoPath:
        return math.inf


def point_distance(sc: SphericalComplex, p: BarycentricPoint, q: BarycentricPoint, depth: int = 1) -> DistanceInterval:
    """Two-sided bound on the spherical path distance between two points.

    Points in a common simplex get the exact spherical angle.  Otherwise the
    upper bound is a subdivision-graph path and the lower bound combines the
    exact vertex distances with the triangle inequality.
    """
    if depth < 1 or depth > MAX_DEPTH:
        raise CapacityError(f"depth must lie in [1, {MAX_DEPTH}]")
    _check_point(sc, p)
    _check_point(sc, q)
    if p.is_vertex() and q.is_vertex():
        d = vertex_distance(sc, p.weights[0][0], q.weights[0][0])
        return DistanceInterval(d, d, True)
    if (p.carrier | q.carrier) in sc.complex.simplices:
        d = spherical_angle(p.as_dict(), q.as_dict())
        if isinstance(d, PiRational):
            return DistanceInterval(d, d, True)
        return DistanceInterval(max(0.0, d - FLOAT_TOL), d + FLOAT_TOL, True)
    comp = sc.complex.component_of
    if comp[next(iter(p.carrier))] != comp[next(iter(q.carrier))]:
        return DistanceInterval(math.inf, math.inf, True)
    hi = _subdivision_upper(sc, p, q, depth)
    lo = 0.0
    pw, qw = p.as_dict(), q.as_dict()
    for v in p.carrier:
        dv = float(spherical_angle(pw, {v: Fraction(1)}))
        for w in q.carrier:
            dw = float(spherical_angle(qw, {w: Fraction(1)}))
            lo = max(lo, float(vertex_distance(sc, v, w)) - dv - dw)
    return DistanceInterval(max(0.0, lo - FLOAT_TOL), hi + FLOAT_TOL, False)


def star(K, v) -> SimplicialComplex:
    """Closed star: every simplex containing ``v`` together with its faces."""
    K = _as_complex(K)
    if frozenset((v,)) not in K.simplices:
        raise PreconditionError(f"unknown vertex {v!r}")
    return SimplicialComplex.from_simplices([s for s in K.maximal if v in s])


@dataclass(frozen=True, eq=False)
class StarsDecomposition:
    subdivision: Subdivision
    pieces: tuple  # Y_0 ... Y_m as subcomplexes of the second subdivision
    stars: tuple  # per k, the list of individual stars
    separations: tuple  # per k, min hop distance between distinct stars (quarter turns) or inf

    def report(self) -> list:
        return [
            {
                "k": k,
                "stars": len(self.stars[k]),
                "simplices": len(self.pieces[k]),
                "separation": to_json(self.separations[k]),
            }
            for k in range(len(self.pieces))
        ]


def _star_separation(K2: SimplicialComplex, stars: list):
    if len(stars) < 2:
        return math.inf
    owner = {}
    for i, s in enumerate(stars):
        for v in s.vertices:
            if v in owner:
                return PiRational.quarter(0)
            owner[v] = i
    best = math.inf
    g = K2.graph
    for i, s in enumerate(stars):
        # multi-source BFS from one star until another star is reached
        seen = set(s.vertices)
        frontier = deque((v, 0) for v in s.vertices)
        while frontier:
            v, dist = frontier.popleft()
            if best != math.inf and dist >= best:
                break
            if owner.get(v, i) != i:
                best = dist if best == math.inf else min(best, dist)
                break
            for w in g[v]:
                if w not in seen:
                    seen.add(w)
                    frontier.append((w, dist + 1))
    return math.inf if best == math.inf else PiRational.quarter(best)


def stars_decomposition(K, m: int | None = None) -> StarsDecomposition:
    """``Y_k``: closed stars in the second subdivision about barycenters of k-simplices."""
    K = _as_complex(K)
    if K.dim > MAX_DECOMPOSITION_DIM:
        raise CapacityError(f"star decompositions are capped at dimension {MAX_DECOMPOSITION_DIM}")
    m = K.dim if m is None else m
    sd = barycentric_subdivision(K, 2)
    K2 = sd.complex
    pieces, stars, seps = [], [], []
    for k in range(m + 1):
        ks = [star(K2, sd.vertex_for(s)) for s in K.simplices_of_dim(k)]
        faces = frozenset().union(*(s.simplices for s in ks)) if ks else frozenset()
        pieces.append(SimplicialComplex(tuple({v for f in faces for v in f}), faces))
        stars.append(ks)
        seps.append(_star_separation(K2, ks))
    return StarsDecomposition(sd, tuple(pieces), tuple(stars), tuple(seps))


def one_skeleton_union(K2: SimplicialComplex, Y: SimplicialComplex) -> SimplicialComplex:
    """``Y`` together with every vertex and edge of the ambient complex."""
    K2 = _as_complex(K2)
    if not Y.is_subcomplex_of(K2):
        raise PreconditionError("Y is not a subcomplex of the ambient complex")
    return Y.union(K2.skeleton(1))


def relatively_connected(sc, Y: SimplicialComplex) -> bool:
    """Each component of the ambient complex meets at most one component of ``Y``."""
    K = _as_complex(sc)
    if not Y.is_subcomplex_of(K):
        raise PreconditionError("Y is not a subcomplex of the ambient complex")
    comp = K.component_of
    seen: dict = {}
    for c in Y.components:
        host = comp[next(iter(c))]
        seen[host] = seen.get(host, 0) + 1
        if seen[host] > 1:
            return False
    return True


def distortion(sc, Y: SimplicialComplex):
    """Max over vertex pairs of (hops inside Y) / (hops in the ambient complex).

    ``inf`` when some pair joined in the ambient complex is disconnected in Y.
    """
    K = _as_complex(sc)
    if not Y.vertices:
        raise PreconditionError("distortion of an empty subcomplex")
    if not Y.is_subcomplex_of(K):
        raise PreconditionError("Y is not a subcomplex of the ambient complex")
    if not relatively_connected(K, Y):
        return math.inf
    best = Fraction(1)
    amb = K.graph
    for v in Y.vertices:
        dy = nx.single_source_shortest_path_length(Y.graph, v)
        dk = nx.single_source_shortest_path_length(amb, v)
        for w, hy in dy.items():
            if w != v:
                best = max(best, Fraction(hy, dk[w]))
    return best


def nerve_projection(cover: Cover, tie_break: str | Callable = "least") -> dict:
    """``η``: a point of each member, the least point id by default."""
    pts = cover.space.points
    out = {}
    for k, m in enumerate(cover.members):
        labels = [pts[i] for i in sorted(m)]
        if tie_break == "least":
            out[k] = min(labels, key=label_key)
        elif tie_break == "greatest":
            out[k] = max(labels, key=label_key)
        elif callable(tie_break):
            choice = tie_break(k, labels)
            if choice not in labels:
                raise PreconditionError(f"tie-break chose {choice!r} outside member {k}")
            out[k] = choice
        else:
            raise PreconditionError(f"unknown tie-break {tie_break!r}")
    return out
