"""Random instance generators shared by the unit and acceptance tests."""
from __future__ import annotations

import itertools
import random
from fractions import Fraction

from coarsekit.complexes import SimplicialComplex
from coarsekit.spaces import FilteredMetricSpace


def random_complex(rng: random.Random, max_dim: int = 3, max_simplices: int = 60, n_vertices: int = 9) -> SimplicialComplex:
    """Closure of random simplices, regrown until the face count fits the cap."""
    while True:
        verts = list(range(rng.randint(1, n_vertices)))
        tops = []
        for _ in range(rng.randint(1, 6)):
            k = rng.randint(0, min(max_dim, len(verts) - 1))
            tops.append(rng.sample(verts, k + 1))
        K = SimplicialComplex.from_simplices(tops, verts)
        if len(K) <= max_simplices:
            return K


def bfs_hops(K: SimplicialComplex, v, w):
    """Independent breadth-first search on the 1-skeleton."""
    if v == w:
        return 0
    adj = {u: set() for u in K.vertices}
    for e in K.simplices_of_dim(1):
        a, b = tuple(e)
        adj[a].add(b)
        adj[b].add(a)
    seen, frontier, d = {v}, [v], 0
    while frontier:
        d += 1
        nxt = []
        for u in frontier:
            for x in adj[u]:
                if x == w:
                    return d
                if x not in seen:
                    seen.add(x)
                    nxt.append(x)
        frontier = nxt
    return None


def random_operator_entries(rng: random.Random, rows: int, cols: int, density: float = 0.2) -> dict:
    out = {}
    for r, c in itertools.product(range(rows), range(cols)):
        if rng.random() < density:
            out[(r, c)] = Fraction(rng.randint(-5, 5), rng.randint(1, 4))
    return out


def random_line_space(rng: random.Random, n: int) -> FilteredMetricSpace:
    coords = sorted(rng.sample(range(0, 4 * n), n))
    return FilteredMetricSpace.from_function(list(range(n)), lambda a, b: abs(coords[a] - coords[b]))
