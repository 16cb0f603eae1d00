"""Binary decomposition trees over the second barycentric subdivision.

The canonical tree of a complex ``K`` of dimension ``m`` is

    Z_m (root),  Z_k = Z_{k-1} ∪ Ỹ_k,  Z_0 = Ỹ_0,  Ỹ_k = Y_k ∪ G_k,  G_k = V_k ∪ E_k

where ``Y_k`` is the union of stars in ``K^(2)`` about barycenters of
k-simplices, ``G_k`` the edges of ``K^(2)`` outside ``Y_k``, and ``V_k``,
``E_k`` split ``G_k`` into stars about its vertices and separated segments.

To split edges into separated pieces every edge of ``K^(2)`` is cut into
thirds.  Labels are therefore sets of cells of a fixed cell complex: the
vertices and higher simplices of ``K^(2)``, plus two cut points and three
thirds per edge.  The graph of points and thirds carries the length metric,
measured in thirds of a ``K^(2)`` edge (one third = ``1/3`` quarter turn).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Sequence

import networkx as nx
import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .coarse import excisive_profile
from .complexes import (
    SimplicialComplex,
    Subdivision,
    _as_complex,
    barycentric_subdivision,
    label_json,
    label_key,
    star,
)
from .errors import CapacityError, PreconditionError
from .exact import PiRational, to_json
from .spaces import FilteredMetricSpace

__all__ = [
    "TrisectedComplex",
    "Label",
    "TreeNode",
    "DecompositionTree",
    "build_canonical_tree",
    "verify_tree_labels",
    "admissibility_report",
]

MAX_TREE_DIM = 3
MAX_METRIC_POINTS = 4000


@lru_cache(maxsize=None)
def _edge_key(e: frozenset) -> tuple:
    return tuple(sorted(e, key=label_key))


def cell_dim(cell) -> int:
    kind = cell[0]
    if kind in ("v", "t"):
        return 0
    if kind == "e":
        return 1
    return len(cell[1]) - 1


def _edge_cells(e: frozenset) -> set:
    """The closed edge ``e`` of ``K^(2)``: endpoints, cut points and thirds."""
    a, b = _edge_key(e)
    return {("v", a), ("v", b), ("t", e, 1), ("t", e, 2), ("e", e, 0), ("e", e, 1), ("e", e, 2)}


def _third_cells(e: frozenset, j: int) -> set:
    """Third ``j`` of edge ``e`` with its two endpoints; thirds run from the smaller endpoint."""
    a, b = _edge_key(e)
    ends = [("v", a), ("t", e, 1), ("t", e, 2), ("v", b)]
    return {("e", e, j), ends[j], ends[j + 1]}


def _third_ends(e: frozenset, j: int) -> tuple:
    a, b = _edge_key(e)
    ends = [("v", a), ("t", e, 1), ("t", e, 2), ("v", b)]
    return ends[j], ends[j + 1]


@dataclass(frozen=True)
class Label:
    """A closed set of cells."""

    cells: frozenset

    def __or__(self, other: "Label") -> "Label":
        return Label(self.cells | other.cells)

    def __and__(self, other: "Label") -> "Label":
        return Label(self.cells & other.cells)

    def __len__(self):
        return len(self.cells)

    @property
    def dim(self) -> int:
        return max((cell_dim(c) for c in self.cells), default=-1)

    @cached_property
    def points(self) -> list:
        return sorted((c for c in self.cells if cell_dim(c) == 0), key=_cell_key)

    def maximal(self) -> list:
        """Cells not on the boundary of another cell of the label."""
        covered = set()
        for c in self.cells:
            covered |= _boundary(c)
        return sorted(self.cells - covered, key=_cell_key)

    def to_json(self) -> list:
        return [_cell_json(c) for c in self.maximal()]


def _boundary(c) -> set:
    if c[0] == "e":
        return set(_third_ends(c[1], c[2]))
    if c[0] != "s":
        return set()
    out = set()
    items = sorted(c[1], key=label_key)
    for k in range(1, len(items)):
        for f in itertools.combinations(items, k):
            f = frozenset(f)
            if k == 1:
                out.add(("v", next(iter(f))))
            elif k == 2:
                out |= _edge_cells(f)
            else:
                out.add(("s", f))
    return out


@lru_cache(maxsize=None)
def _cell_key(c):
    return (cell_dim(c), c[0], label_key(c[1]), c[2] if len(c) > 2 else 0)


def _cell_json(c):
    if c[0] == "v":
        return [label_json(c[1])]
    if c[0] == "s":
        return [label_json(v) for v in sorted(c[1], key=label_key)]
    kind = "third" if c[0] == "e" else "cut"
    return {"edge": [label_json(v) for v in _edge_key(c[1])], kind: c[2]}


class TrisectedComplex:
    """``K^(2)`` with every edge cut into thirds."""

    def __init__(self, K):
        K = _as_complex(K)
        if K.dim > MAX_TREE_DIM:
            raise CapacityError(f"decomposition trees are capped at dimension {MAX_TREE_DIM}")
        if not K.vertices:
            raise PreconditionError("the complex is empty")
        self.base = K
        self.subdivision: Subdivision = barycentric_subdivision(K, 2)
        self.K2: SimplicialComplex = self.subdivision.complex
        self.whole = self.cells_of(self.K2)

    def cells_of(self, Y: SimplicialComplex) -> Label:
        cells = set()
        for s in Y.simplices:
            if len(s) == 1:
                cells.add(("v", next(iter(s))))
            elif len(s) == 2:
                cells |= _edge_cells(s)
            else:
                cells.add(("s", s))
        return Label(frozenset(cells))

    @cached_property
    def graph(self) -> nx.Graph:
        g = nx.Graph()
        for c in self.whole.cells:
            if cell_dim(c) == 0:
                g.add_node(c)
            elif c[0] == "e":
                g.add_edge(*_third_ends(c[1], c[2]))
        return g

    @cached_property
    def point_index(self) -> dict:
        return {p: k for k, p in enumerate(sorted(self.graph.nodes, key=_cell_key))}

    @cached_property
    def lengths(self) -> np.ndarray:
        """All-pairs distances in thirds; ``-1`` across components."""
        n = len(self.point_index)
        if n > MAX_METRIC_POINTS:
            raise CapacityError(f"metric reports are capped at {MAX_METRIC_POINTS} points, got {n}")
        idx = self.point_index
        rows = [idx[u] for u, v in self.graph.edges] + [idx[v] for u, v in self.graph.edges]
        cols = [idx[v] for u, v in self.graph.edges] + [idx[u] for u, v in self.graph.edges]
        g = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
        d = shortest_path(g, directed=False, unweighted=True)
        return np.where(np.isfinite(d), d, -1).astype(np.int64)

    def subgraph(self, label: Label) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(c for c in label.cells if cell_dim(c) == 0)
        for c in label.cells:
            if c[0] == "e":
                g.add_edge(*_third_ends(c[1], c[2]))
        return g

    def metric_space(self, label: Label) -> FilteredMetricSpace:
        pts = label.points
        idx = [self.point_index[p] for p in pts]
        d = self.lengths[np.ix_(idx, idx)]
        if (d < 0).any():
            raise PreconditionError("metric reports need a connected ambient complex")
        return FilteredMetricSpace.from_matrix(pts, d)

    def separation(self, parts: Sequence[Label]):
        """Least ambient distance between distinct parts, in quarter turns; 0 if two parts meet."""
        if len(parts) < 2:
            return math.inf
        best = math.inf
        owner: dict = {}
        for i, part in enumerate(parts):
            for p in part.points:
                if p in owner:
                    return PiRational.quarter(0)
                owner[p] = i
        L = self.lengths
        groups = [[self.point_index[p] for p in part.points] for part in parts]
        for i in range(len(groups)):
            for j in range(i + 1, len(groups)):
                sub = L[np.ix_(groups[i], groups[j])]
                sub = sub[sub >= 0]
                if sub.size:
                    best = min(best, int(sub.min()))
        return math.inf if best == math.inf else PiRational.quarter(Fraction(best, 3))

    def components(self, label: Label) -> list:
        """Connected pieces of a label, each closed."""
        g = self.subgraph(label)
        comp = {}
        for k, cc in enumerate(nx.connected_components(g)):
            for p in cc:
                comp[p] = k
        parts: list = [set() for _ in range(max(comp.values(), default=-1) + 1)]
        for c in label.cells:
            if c[0] in ("v", "t"):
                parts[comp[c]].add(c)
            elif c[0] == "e":
                parts[comp[_third_ends(c[1], c[2])[0]]].add(c)
            else:
                parts[comp[("v", next(iter(c[1])))]].add(c)
        return sorted((Label(frozenset(p)) for p in parts), key=lambda L: _cell_key(L.points[0]))

    def relatively_connected(self, label: Label) -> bool:
        amb = {}
        for k, cc in enumerate(nx.connected_components(self.graph)):
            for p in cc:
                amb[p] = k
        seen = set()
        for cc in nx.connected_components(self.subgraph(label)):
            host = amb[next(iter(cc))]
            if host in seen:
                return False
            seen.add(host)
        return True

    def distortion(self, label: Label):
        """Max ratio of inner to ambient path length over point pairs of the label."""
        if not label.points:
            raise PreconditionError("distortion of an empty label")
        if not self.relatively_connected(label):
            return math.inf
        pts = label.points
        pos = {p: k for k, p in enumerate(pts)}
        g = self.subgraph(label)
        rows = [pos[u] for u, v in g.edges] + [pos[v] for u, v in g.edges]
        cols = [pos[v] for u, v in g.edges] + [pos[u] for u, v in g.edges]
        inner = shortest_path(csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(len(pts), len(pts))), directed=False, unweighted=True)
        idx = [self.point_index[p] for p in pts]
        amb = self.lengths[np.ix_(idx, idx)].astype(float)
        ok = np.isfinite(inner) & (amb > 0)
        if not ok.any():
            return Fraction(1)
        # ratios of small integers: the float argmax is the exact maximum
        ratio = np.where(ok, inner / np.where(amb > 0, amb, 1.0), 0.0)
        i, j = np.unravel_index(int(np.argmax(ratio)), ratio.shape)
        return max(Fraction(1), Fraction(int(inner[i, j]), int(amb[i, j])))


@dataclass(frozen=True)
class TreeNode:
    name: str
    label: Label
    children: tuple = ()

    @property
    def is_leaf(self) -> bool:
        return not self.children


@dataclass
class DecompositionTree:
    ambient: TrisectedComplex
    nodes: dict  # name -> TreeNode
    root: str
    roles: dict = field(default_factory=dict)  # name -> (kind, k)

    def forks(self) -> list:
        return [n for n in self._order() if not self.nodes[n].is_leaf]

    def leaves(self) -> list:
        return [n for n in self._order() if self.nodes[n].is_leaf]

    def _order(self) -> list:
        out, stack = [], [self.root]
        while stack:
            n = stack.pop()
            out.append(n)
            stack.extend(reversed(self.nodes[n].children))
        return out

    def to_json(self, name: str | None = None) -> dict:
        node = self.nodes[name or self.root]
        return {
            "name": node.name,
            "label": node.label.to_json(),
            "children": [self.to_json(c) for c in node.children],
        }


def build_canonical_tree(K, m: int | None = None) -> DecompositionTree:
    """Assemble the canonical tree; every label law is checked before returning."""
    amb = TrisectedComplex(K)
    base = amb.base
    m = base.dim if m is None else m
    if m != base.dim:
        raise PreconditionError(f"dimension {m} does not match the complex (dim {base.dim})")
    sd, K2 = amb.subdivision, amb.K2
    nodes: dict = {}
    roles: dict = {}
    ytilde: dict = {}

    def add(name, label, children=(), role=None):
        nodes[name] = TreeNode(name, label, tuple(children))
        roles[name] = role

    for k in range(m + 1):
        stars = [star(K2, sd.vertex_for(s)) for s in base.simplices_of_dim(k)]
        Yk = SimplicialComplex.from_simplices([t for s in stars for t in s.maximal])
        yk = amb.cells_of(Yk)
        add(f"Y_{k}", yk, role=("Y", k))
        G = [frozenset(e) for e in K2.edges if frozenset(e) not in Yk.simplices]
        if not G:
            ytilde[k] = f"Y_{k}"
            continue
        gk = Label(frozenset().union(*(_edge_cells(e) for e in G)))
        gverts = sorted({v for e in G for v in e}, key=label_key)
        vk, ek = set(), set()
        for e in G:
            vk |= _third_cells(e, 0) | _third_cells(e, 2)
            ek |= _third_cells(e, 1)
        assert {c[1] for c in vk if c[0] == "v"} == set(gverts)
        add(f"V_{k}", Label(frozenset(vk)), role=("V", k))
        add(f"E_{k}", Label(frozenset(ek)), role=("E", k))
        add(f"G_{k}", gk, (f"V_{k}", f"E_{k}"), role=("G", k))
        ytilde[k] = f"Ytilde_{k}"
        add(ytilde[k], yk | gk, (f"Y_{k}", f"G_{k}"), role=("Ytilde", k))

    # Z_0 is Ỹ_0 itself
    prev = ytilde[0]
    for k in range(1, m + 1):
        z = f"Z_{k}"
        add(z, nodes[prev].label | nodes[ytilde[k]].label, (prev, ytilde[k]), role=("Z", k))
        prev = z
    tree = DecompositionTree(amb, nodes, prev, roles)
    verdict = verify_tree_labels(tree)
    if not verdict["ok"]:
        raise AssertionError(f"canonical tree violates a label law: {verdict}")
    return tree


def verify_tree_labels(tree: DecompositionTree) -> dict:
    """Root label is the whole complex and every fork is the union of its two successors."""
    for name, node in tree.nodes.items():
        if len(node.children) not in (0, 2):
            return {"ok": False, "node": name, "law": "zero or two successors"}
    root = tree.nodes[tree.root]
    if root.label != tree.ambient.whole:
        missing = sorted(tree.ambient.whole.cells - root.label.cells, key=_cell_key)
        return {
            "ok": False,
            "node": tree.root,
            "law": "root labeled by the whole complex",
            "witness": _cell_json(missing[0]) if missing else None,
        }
    for name in tree.forks():
        node = tree.nodes[name]
        a, b = (tree.nodes[c].label for c in node.children)
        if node.label != a | b:
            diff = sorted(node.label.cells ^ (a | b).cells, key=_cell_key)
            return {"ok": False, "node": name, "law": "fork labeled by the union of its successors", "witness": _cell_json(diff[0])}
    return {"ok": True, "node": None, "law": None}


def admissibility_report(tree: DecompositionTree, scales: Sequence = (1, 2, 3, 6)) -> dict:
    """Checkable premises of admissibility at every node; no K-theoretic claim is made.

    Lengths and scales are in thirds of a ``K^(2)`` edge.
    """
    verdict = verify_tree_labels(tree)
    if not verdict["ok"]:
        raise PreconditionError(f"tree labels do not verify: {verdict}")
    amb = tree.ambient
    forks, leaves = [], []
    for name in tree.forks():
        node = tree.nodes[name]
        Y, Z = (tree.nodes[c].label for c in node.children)
        inter = Y & Z
        space = amb.metric_space(node.label)
        prof = excisive_profile(space, Y.points, Z.points, list(scales))
        entry = {
            "node": name,
            "children": list(node.children),
            "excisive": {str(R): to_json(S) for R, S in prof.items()},
            "excisive_all": all(S != "fail" for S in prof.values()),
            "intersection_dim": inter.dim,
        }
        for tag, lab in (("left", Y), ("right", Z), ("intersection", inter)):
            if lab.points:
                entry[f"{tag}_relatively_connected"] = amb.relatively_connected(lab)
                entry[f"{tag}_distortion"] = to_json(amb.distortion(lab))
            else:
                entry[f"{tag}_relatively_connected"] = None
                entry[f"{tag}_distortion"] = None
        forks.append(entry)
    for name in tree.leaves():
        lab = tree.nodes[name].label
        parts = amb.components(lab)
        sep = amb.separation(parts)
        leaves.append({
            "node": name,
            "pieces": len(parts),
            "kind": "finite" if len(parts) == 1 else "uniformly separated star family",
            "separation": to_json(sep),
            "separation_positive": sep == math.inf or sep > 0,
        })
    return {
        "unit": "one third of an edge of the second subdivision (1/3 quarter turn)",
        "scales": [to_json(s) for s in scales],
        "labels": verdict,
        "forks": forks,
        "leaves": leaves,
    }
