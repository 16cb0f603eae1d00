"""Layered graph model of a coarsening space.

Level ``i`` carries the nerve of the ``i``-th cover.  Nodes at a level are
points of that nerve: the vertices of its depth-``s`` subdivision, closed
under pushing forward along the connecting maps.  Two nodes of one level are
joined when they share a simplex, with the exact spherical angle as length;
a node is joined to its push-forward one level up by an edge of length 1.
Graph paths are admissible paths, so graph distances bound the true metric
from above.

At depth 0 the nodes are nerve vertices and every length has the form
``a + b * pi/2`` with integers ``a, b``; those two counts are tracked exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .complexes import (
    BarycentricPoint,
    SimplicialComplex,
    SimplicialMap,
    barycentric_subdivision,
    connecting_map,
    label_json,
    label_key,
    nerve,
    spherical_angle,
)
from .errors import PreconditionError
from .exact import QUARTER_TURN, PiRational, to_json
from .spaces import AntiCechSequence, Cover, FilteredMetricSpace

__all__ = [
    "CoarseningSpace",
    "build_coarsening",
    "pi",
    "partial_space",
    "graph_distance",
    "collapse",
    "collapse_to_point_level",
    "swindle_sequence",
    "check_swindle_hypotheses",
    "exact_le",
]


def exact_le(a1, b1, a2, b2) -> np.ndarray:
    """Vectorized exact test ``a1 + b1*pi/2 <= a2 + b2*pi/2`` for integer arrays.

    For the small integers met here a nonzero ``da + db*pi/2`` is far from 0,
    so the float sign is reliable; near-zero values are settled exactly.
    """
    da = np.asarray(a1, dtype=np.int64) - np.asarray(a2, dtype=np.int64)
    db = np.asarray(b1, dtype=np.int64) - np.asarray(b2, dtype=np.int64)
    val = da + db * QUARTER_TURN
    out = val < 0
    out |= (da == 0) & (db == 0)
    close = (np.abs(val) < 1e-6) & ~((da == 0) & (db == 0))
    for idx in zip(*np.nonzero(close)):
        out[idx] = PiRational(int(da[idx]), int(db[idx])).sign() <= 0
    return out


@dataclass(eq=False)
class CoarseningSpace:
    covers: tuple
    nerves: tuple
    connects: tuple
    depth: int
    nodes: list  # (level, BarycentricPoint), sorted by level
    certified: bool = False
    edges: list = field(default_factory=list)  # (u, v, weight) with float weights
    exact_edges: dict = field(default_factory=dict)  # (u, v) -> (vertical, quarter) at depth 0

    def __post_init__(self):
        self.index = {node: k for k, node in enumerate(self.nodes)}
        self.levels = np.array([lv for lv, _ in self.nodes], dtype=np.int64)
        self.N = len(self.nerves)
        self._solve()

    # construction ---------------------------------------------------------

    def _solve(self):
        n = len(self.nodes)
        rows, cols, data = [], [], []
        for u, v, w in self.edges:
            rows += [u, v]
            cols += [v, u]
            data += [w, w]
        graph = csr_matrix((data, (rows, cols)), shape=(n, n))
        dist, pred = dijkstra(graph, directed=False, return_predecessors=True)
        self.length = dist
        self.vertical = None
        self.quarter = None
        if self.depth == 0:
            # rebuild each shortest-path tree with exact (vertical, quarter) counts
            A = np.zeros((n, n), dtype=np.int64)
            B = np.zeros((n, n), dtype=np.int64)
            for s in range(n):
                order = np.argsort(dist[s], kind="stable")
                for v in order:
                    p = pred[s, v]
                    if p < 0 or not np.isfinite(dist[s, v]):
                        continue
                    a, b = self.exact_edges[(min(p, v), max(p, v))]
                    A[s, v] = A[s, p] + a
                    B[s, v] = B[s, p] + b
            self.vertical, self.quarter = A, B

    # queries -------------------------------------------------------------

    def __len__(self):
        return len(self.nodes)

    def node(self, level: int, point) -> int:
        if not isinstance(point, BarycentricPoint):
            point = BarycentricPoint.vertex(point)
        try:
            return self.index[(level, point)]
        except KeyError:
            raise PreconditionError(f"no node {point.to_json()} at level {level}") from None

    def distance(self, u: int, v: int):
        if not np.isfinite(self.length[u, v]):
            return math.inf
        if self.depth == 0:
            return PiRational(int(self.vertical[u, v]), int(self.quarter[u, v]))
        return float(self.length[u, v])

    def le(self, u1, v1, u2, v2) -> np.ndarray:
        """Exact (depth 0) or tolerance-aware ``d(u1, v1) <= d(u2, v2)``, vectorized."""
        if self.depth == 0:
            return exact_le(self.vertical[u1, v1], self.quarter[u1, v1], self.vertical[u2, v2], self.quarter[u2, v2])
        return self.length[u1, v1] <= self.length[u2, v2] + 1e-9

    @cached_property
    def push_table(self) -> np.ndarray:
        """``push[k]``: the node one level up reached by the vertical edge (or k at the top)."""
        push = np.arange(len(self.nodes))
        for k, (lv, pt) in enumerate(self.nodes):
            if lv < self.N:
                push[k] = self.index[(lv + 1, pt.push(self.connects[lv - 1]))]
        return push

    @cached_property
    def collapse_tables(self) -> np.ndarray:
        """Row ``t - 1`` is ``Φ_t`` as an index array."""
        tables = np.zeros((self.N, len(self.nodes)), dtype=np.int64)
        current = np.arange(len(self.nodes))
        push = self.push_table
        for t in range(1, self.N + 1):
            tables[t - 1] = current
            below = self.levels[current] <= t
            current = np.where(below, push[current], current)
        return tables

    def as_metric_space(self) -> FilteredMetricSpace:
        """The node set with the graph metric, filtered by the partial spaces."""
        n = len(self.nodes)
        if self.depth == 0:
            cache: dict = {}
            dist = np.empty((n, n), dtype=object)
            for i in range(n):
                for j in range(n):
                    key = (int(self.vertical[i, j]), int(self.quarter[i, j]))
                    if key not in cache:
                        cache[key] = PiRational(*key)
                    dist[i, j] = cache[key]
        else:
            dist = self.length.copy()
        filt = tuple(frozenset(np.flatnonzero(self.levels <= i).tolist()) for i in range(1, self.N + 1))
        return FilteredMetricSpace(tuple(self.nodes), dist, filt)

    def level_vertex_consistency(self) -> bool:
        """Graph distance between nerve vertices through one level equals quarter turns times hops."""
        for lv, K in enumerate(self.nerves, start=1):
            idx = [self.node(lv, v) for v in K.vertices]
            sub = [(u, v, w) for u, v, w in self.edges if self.levels[u] == lv and self.levels[v] == lv]
            pos = {k: j for j, k in enumerate(sorted({x for e in sub for x in e[:2]} | set(idx)))}
            rows = [pos[u] for u, v, w in sub] + [pos[v] for u, v, w in sub]
            cols = [pos[v] for u, v, w in sub] + [pos[u] for u, v, w in sub]
            data = [w for *_, w in sub] * 2
            g = csr_matrix((data, (rows, cols)), shape=(len(pos), len(pos)))
            d = dijkstra(g, directed=False, indices=[pos[i] for i in idx])
            for a, v in enumerate(K.vertices):
                for b, w in enumerate(K.vertices):
                    hops = nx_hops(K, v, w)
                    want = math.inf if hops is None else hops * QUARTER_TURN
                    got = d[a, pos[idx[b]]]
                    if not (math.isinf(want) and math.isinf(got)) and abs(got - want) > 1e-9:
                        return False
        return True

    def to_json(self) -> dict:
        return {
            "levels": self.N,
            "depth": self.depth,
            "certified": self.certified,
            "complexes": [K.to_json() for K in self.nerves],
            "connecting_maps": [f.to_json() for f in self.connects],
            "nodes": [{"id": k, "level": lv, "point": pt.to_json()} for k, (lv, pt) in enumerate(self.nodes)],
            "edges": [
                {"u": u, "v": v, "length": to_json(PiRational(*self.exact_edges[(u, v)])) if self.depth == 0 else w}
                for u, v, w in self.edges
            ],
            "node_counts": [int((self.levels == i).sum()) for i in range(1, self.N + 1)],
        }


def nx_hops(K: SimplicialComplex, v, w):
    import networkx as nx

    try:
        return nx.shortest_path_length(K.graph, v, w)
    except nx.NetworkXNoPath:
        return None


def build_coarsening(covers, depth: int = 0) -> CoarseningSpace:
    """Assemble the graph model from a refining list of covers."""
    certified = isinstance(covers, AntiCechSequence)
    covers = tuple(covers.covers if certified else covers)
    if not covers:
        raise PreconditionError("at least one cover is needed")
    if depth < 0 or depth > 2:
        raise PreconditionError("subdivision depth must lie in [0, 2]")
    nerves = tuple(nerve(c) for c in covers)
    connects = tuple(connecting_map(a, b) for a, b in zip(covers, covers[1:]))
    per_level = []
    for K in nerves:
        if depth == 0:
            pts = {BarycentricPoint.vertex(v) for v in K.vertices}
        else:
            sd = barycentric_subdivision(K, depth)
            pts = {BarycentricPoint(tuple(sd.position[v].items())) for v in sd.complex.vertices}
        per_level.append(pts)
    for i, f in enumerate(connects):
        per_level[i + 1] |= {p.push(f) for p in per_level[i]}
    nodes = []
    for lv, pts in enumerate(per_level, start=1):
        nodes += [(lv, p) for p in sorted(pts, key=lambda p: label_key(p.weights))]
    index = {node: k for k, node in enumerate(nodes)}
    edges, exact = [], {}
    for lv, pts in enumerate(per_level, start=1):
        K = nerves[lv - 1]
        ids = [index[(lv, p)] for p in sorted(pts, key=lambda p: label_key(p.weights))]
        for a in range(len(ids)):
            pa = nodes[ids[a]][1]
            for b in range(a + 1, len(ids)):
                pb = nodes[ids[b]][1]
                if (pa.carrier | pb.carrier) not in K.simplices:
                    continue
                ang = spherical_angle(pa.as_dict(), pb.as_dict())
                u, v = ids[a], ids[b]
                edges.append((u, v, float(ang)))
                if depth == 0:
                    exact[(u, v)] = (0, 1)
        if lv < len(nerves):
            f = connects[lv - 1]
            for k in ids:
                u, v = k, index[(lv + 1, nodes[k][1].push(f))]
                edges.append((min(u, v), max(u, v), 1.0))
                exact[(min(u, v), max(u, v))] = (1, 0)
    return CoarseningSpace(covers, nerves, connects, depth, nodes, certified, edges, exact)


def pi(X: CoarseningSpace, p: int) -> int:
    return int(X.levels[p])


def partial_space(X: CoarseningSpace, i: int) -> list:
    if not 1 <= i <= X.N:
        raise PreconditionError(f"level {i} outside [1, {X.N}]")
    return np.flatnonzero(X.levels <= i).tolist()


def graph_distance(X: CoarseningSpace, p: int, q: int):
    return X.distance(p, q)


def collapse(X: CoarseningSpace, t: int, p: int) -> int:
    """``Φ_t``: push a node below level ``t`` up to level ``t``."""
    if not 1 <= t <= X.N:
        raise PreconditionError(f"collapse level {t} outside [1, {X.N}]")
    return int(X.collapse_tables[t - 1][p])


def collapse_to_point_level(X: CoarseningSpace, K: Sequence[int]):
    """Least ``t``, scanning up from the top level of ``K``, with ``Φ_t(K)`` a single node."""
    K = list(K)
    if not K:
        raise PreconditionError("K must be nonempty")
    start = int(X.levels[K].max())
    for t in range(start, X.N + 1):
        if len(set(X.collapse_tables[t - 1][K].tolist())) == 1:
            return t
    return None


def swindle_sequence(X: CoarseningSpace, x0: int, kmax: int) -> list:
    """``α_k(x) = Φ_r(x)`` with ``r = ⌈ln k - d(x, x0)⌉`` clamped into ``[1, N]``."""
    if kmax < 1:
        raise PreconditionError("kmax must be positive")
    d = X.length[x0]
    maps = []
    for k in range(1, kmax + 1):
        r = np.ceil(np.maximum(math.log(k) - d, 0.0))
        r = np.clip(np.nan_to_num(r, nan=1.0, posinf=X.N), 1, X.N).astype(np.int64)
        maps.append(X.collapse_tables[r - 1, np.arange(len(X))])
    return maps


def _dedupe(maps):
    seen, out = {}, []
    for m in maps:
        key = m.tobytes()
        if key not in seen:
            seen[key] = len(out)
            out.append(m)
    return out


def check_swindle_hypotheses(maps: Sequence, X: CoarseningSpace, x0: int, radii: Sequence | None = None, control_radii: Sequence | None = None) -> dict:
    """Quantitative versions of the three swindle hypotheses.

    (a) for balls ``B`` about ``x0``, the last ``k`` with ``Range(α_k) ∩ B ≠ ∅``;
    (b) the control table ``R ↦ sup_k sup_{d(x,x')<=R} d(α_k x, α_k x')``;
    (c) the step bound ``sup_{k,x} d(α_k x, α_{k+1} x)``.
    """
    n = len(X)
    kmax = len(maps)
    radii = list(range(1, max(2, X.N - 1))) if radii is None else list(radii)
    escape = []
    for rho in radii:
        ball = X.length[x0] <= float(rho) + 1e-9
        last = 0
        for k, m in enumerate(maps, start=1):
            if ball[m].any():
                last = k
        escape.append({
            "radius": to_json(rho),
            "last_k": last,
            "escaped": last < kmax,
        })
    lasts = [e["last_k"] for e in escape]
    increasing = all(a < b for a, b in zip(lasts, lasts[1:]))

    if control_radii is None:
        diam = float(X.length[np.isfinite(X.length)].max())
        control_radii = list(range(0, math.ceil(diam) + 1))
    control_radii = [float(c) for c in control_radii]
    distinct = _dedupe(maps)
    control = []
    src = X.length
    for R in control_radii:
        mask = src <= R + 1e-9
        best, arg = 0.0, None
        for m in distinct:
            img = X.length[np.ix_(m, m)]
            vals = np.where(mask, img, -1.0)
            flat = int(np.argmax(vals))
            if vals.flat[flat] > best or arg is None:
                best, arg = float(vals.flat[flat]), (int(m[flat // n]), int(m[flat % n]))
        value = X.distance(*arg) if arg is not None else 0
        control.append({"R": R, "sup": to_json(value), "float": float(best)})

    step, witness = 0.0, None
    for k in range(kmax - 1):
        a, b = maps[k], maps[k + 1]
        vals = X.length[a, b]
        j = int(np.argmax(vals))
        if witness is None or vals[j] > step:
            step, witness = float(vals[j]), {"k": k + 1, "node": j}
    step_exact = X.distance(int(maps[witness["k"] - 1][witness["node"]]), int(maps[witness["k"]][witness["node"]])) if witness else 0

    return {
        "x0": x0,
        "kmax": kmax,
        "escape": escape,
        "escape_strictly_increasing": increasing,
        "control": control,
        "control_finite": all(math.isfinite(c["float"]) for c in control),
        "step_bound": to_json(step_exact),
        "step_bound_float": step,
        "step_witness": witness,
        "step_finite": math.isfinite(step),
        "certificate": [
            {"hypothesis": "properly supported", "holds": all(e["escaped"] for e in escape)},
            {"hypothesis": "uniformly controlled", "holds": all(math.isfinite(c["float"]) for c in control)},
            {"hypothesis": "uniformly close steps", "holds": math.isfinite(step)},
        ],
    }
