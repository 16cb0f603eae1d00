"""The eleven acceptance criteria, each at its stated size, tolerance and time budget.

Every criterion records one PASS/FAIL line, printed in the terminal summary.
Oracles are independent of the code under test: plain BFS, pure-Python set
arithmetic, numpy angles and brute-force enumeration.
"""
import itertools
import math
import random
import time
from fractions import Fraction

import numpy as np
import pytest

from coarsekit.coarse import PointMap, excisive_profile
from coarsekit.coarsening import build_coarsening, check_swindle_hypotheses, swindle_sequence
from coarsekit.complexes import BarycentricPoint, SimplicialComplex, SphericalComplex, nerve, point_distance, vertex_distance
from coarsekit.decomposition import admissibility_report, build_canonical_tree, verify_tree_labels
from coarsekit.exact import PiRational
from coarsekit.kgroups import discrete_mv_chain, exactness_check, theorem317_report
from coarsekit.roe import FiniteOperator, covering_isometry, opnorm, split_along, swindle_rotation, truncate
from coarsekit.spaces import Cover, FilteredMetricSpace, brick_cover, build_anticech, r_degree

from conftest import ACCEPTANCE
from helpers import bfs_hops, random_complex, random_line_space, random_operator_entries

Q = PiRational.quarter


def record(n: int, ok: bool, detail: str, elapsed: float, budget: float):
    status = "PASS" if ok and elapsed < budget else "FAIL"
    ACCEPTANCE[n] = f"criterion {n:>2}: {status}  {detail}  ({elapsed:.2f}s / {budget:.0f}s)"


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start


# 1 ----------------------------------------------------------------------


def test_criterion_01_nerve_fidelity():
    with Timer() as t:
        pts = [Fraction(i, 60) for i in range(61)]
        line = FilteredMetricSpace.from_function(pts, lambda a, b: abs(a - b))
        U = Cover.from_points(line, [[p for p in pts if p < Fraction(2, 3)], [p for p in pts if p > Fraction(1, 2)]])
        edge = nerve(U).simplices
        circle = FilteredMetricSpace.from_function(range(60), lambda a, b: min(abs(a - b), 60 - abs(a - b)))
        arcs = Cover.from_points(circle, [range(0, 21), range(20, 41), [*range(40, 60), 0]])
        tri = nerve(arcs).simplices
    want_edge = {frozenset(s) for s in ([0], [1], [0, 1])}
    want_tri = {frozenset(s) for s in ([0], [1], [2], [0, 1], [1, 2], [0, 2])}
    ok = edge == want_edge and tri == want_tri
    record(1, ok, "interval cover -> 1-simplex, three arcs -> hollow triangle", t.elapsed, 1)
    assert ok and t.elapsed < 1


# 2 ----------------------------------------------------------------------


def numpy_angle(p: dict, q: dict) -> float:
    keys = sorted(set(p) | set(q))
    a = np.array([float(p.get(k, 0)) for k in keys])
    b = np.array([float(q.get(k, 0)) for k in keys])
    a, b = a / np.linalg.norm(a), b / np.linalg.norm(b)
    # half-chord form; arccos loses half the digits near 0
    return float(2 * np.arctan2(np.linalg.norm(a - b), np.linalg.norm(a + b)))


def test_criterion_02_vertex_distances():
    rng = random.Random(2024)
    pairs = inside = 0
    ok = True
    with Timer() as t:
        for _ in range(200):
            K = random_complex(rng, max_dim=3, max_simplices=60)
            sc = SphericalComplex(K)
            for v in K.vertices:
                for w in K.vertices:
                    h = bfs_hops(K, v, w)
                    d = vertex_distance(sc, v, w)
                    ok &= (d == math.inf) if h is None else (d == Q(h))
                    iv = point_distance(sc, BarycentricPoint.vertex(v), BarycentricPoint.vertex(w))
                    ok &= iv.contains(d)
                    pairs += 1
            # points sharing a simplex: the exact angle against a numpy oracle
            simplices = sorted(K.simplices, key=lambda s: sorted(s))
            for _ in range(3):
                s = rng.choice(simplices)
                wp = [Fraction(rng.randint(1, 5)) for _ in s]
                wq = [Fraction(rng.randint(0, 5)) for _ in s]
                wq[0] += 1
                p = BarycentricPoint(tuple(zip(sorted(s), [x / sum(wp) for x in wp])))
                q = BarycentricPoint(tuple(zip(sorted(s), [x / sum(wq) for x in wq])))
                iv = point_distance(sc, p, q)
                ok &= iv.contains(numpy_angle(p.as_dict(), q.as_dict()), tol=1e-9)
                inside += 1
    record(2, ok, f"200 complexes, {pairs} vertex pairs exact, {inside} in-simplex intervals checked", t.elapsed, 30)
    assert ok and t.elapsed < 30


# 3 ----------------------------------------------------------------------


def brute_r_degree(points, members, R):
    """sup_w #{U : d(w, U) < R} with the l1 metric, by direct enumeration."""
    def l1(a, b):
        a = (a,) if isinstance(a, int) else a
        b = (b,) if isinstance(b, int) else b
        return sum(abs(x - y) for x, y in zip(a, b))

    best = 0
    for w in points:
        best = max(best, sum(1 for m in members if min(l1(w, u) for u in m) < R))
    return best


def test_criterion_03_asdim_witnesses():
    with Timer() as t:
        Z = FilteredMetricSpace.integer_interval(-40, 40)
        c1 = brick_cover(Z, 5, side=10)
        d1 = r_degree(c1, 5)[0]
        o1 = brute_r_degree(Z.points, [[Z.points[i] for i in m] for m in c1.members], 5)
        G = FilteredMetricSpace.integer_grid(2, -20, 20)
        c2 = brick_cover(G, 2, side=8)
        d2 = r_degree(c2, 2)[0]
    o2 = brute_r_degree(G.points, [[G.points[i] for i in m] for m in c2.members], 2)
    ok = d1 == o1 and d2 == o2 and d1 <= 2 and d2 <= 3
    record(3, ok, f"Z: R-degree {d1} <= 2 (oracle {o1}); Z^2: R-degree {d2} <= 3 (oracle {o2})", t.elapsed, 10)
    assert ok and t.elapsed < 10


# 4 ----------------------------------------------------------------------


def test_criterion_04_anticech_certificate():
    with Timer() as t:
        Z = FilteredMetricSpace.integer_interval(-200, 200)
        seq = build_anticech(Z, [1, 4, 16, 64])
        members = [[sorted(Z.points[i] for i in m) for m in c.members] for c in seq.covers]
        ok = len(seq.certificate) == len(seq.covers) - 1
        rows = []
        for i in range(1, len(members)):
            diam = max(m[-1] - m[0] for m in members[i - 1])
            # largest L such that every closed L-ball (clipped to the space) lies in one member
            sets = [set(m) for m in members[i]]
            L = 0
            while all(any(set(range(max(-200, x - L - 1), min(200, x + L + 1) + 1)) <= s for s in sets) for x in Z.points):
                L += 1
            ok &= diam <= L
            ok &= Fraction(seq.certificate[i - 1]["diameter"]) == diam
            ok &= Fraction(seq.certificate[i - 1]["lebesgue"]) <= L
            rows.append(f"{diam}<={L}")
    record(4, ok, f"Diam(U_i) <= Lebesgue(U_i+1) recomputed: {', '.join(rows)}", t.elapsed, 30)
    assert ok and t.elapsed < 30


# 5 ----------------------------------------------------------------------


def test_criterion_05_excisiveness():
    with Timer() as t:
        Z = FilteredMetricSpace.integer_interval(-50, 50)
        E = [p for p in Z.points if p >= 0]
        F = [p for p in Z.points if p <= 0]
        prof = excisive_profile(Z, E, F, range(1, 11))
        # oracle: E_R ∩ F_R = [-R, R], whose farthest point from E ∩ F = {0} is at R
        oracle = {R: max(abs(x) for x in Z.points if -R <= x <= R) for R in range(1, 11)}
        half = prof == oracle == {R: R for R in range(1, 11)}
        X = build_coarsening(build_anticech(FilteredMetricSpace.integer_interval(-40, 40), [1, 3, 9, 27]))
        S = X.as_metric_space()
        scales = [1, Q(1), 2, PiRational(1, 1), 4]
        levels_ok = True
        for i in range(1, X.N + 1):
            Xi = [S.points[p] for p in range(len(X)) if X.levels[p] <= i]
            up = [S.points[p] for p in range(len(X)) if X.levels[p] >= i]
            levels_ok &= all(v != "fail" for v in excisive_profile(S, Xi, up, scales).values())
    ok = half and levels_ok and X.N == 4
    record(5, ok, f"half-lines S(R) = R for R = 1..10; X_i u (levels >= i) excisive at {len(scales)} scales on {X.N} levels", t.elapsed, 5)
    assert ok and t.elapsed < 5


# 6 ----------------------------------------------------------------------


def test_criterion_06_roe_identities():
    rng = random.Random(6)
    ok = True
    with Timer() as t:
        for _ in range(1000):
            n, m = rng.randint(2, 8), rng.randint(1, 2)
            sp = random_line_space(rng, n)
            T = FiniteOperator.on(sp, m, random_operator_entries(rng, n * m, n * m, 0.25))
            cut = rng.randint(0, n)
            Y, Zs = sp.points[:cut + 1], sp.points[max(0, cut - 1):]
            TY, TZ, rep = split_along(T, Y, Zs)
            ok &= TY + TZ == T and all(rep[k] for k in ("reassembles", "support_Y_in_thickening", "support_Z_in_thickening"))
            W = rng.sample(sp.points, rng.randint(0, n))
            TW = truncate(T, W)
            ok &= opnorm(TW, 1) <= opnorm(T, 1) and opnorm(TW, 2) <= opnorm(T, 2)
            f = PointMap(sp, sp, tuple(rng.randrange(n) for _ in range(n)))
            g = PointMap(sp, sp, tuple(rng.randrange(n) for _ in range(n)))
            width = m * n
            a, b = covering_isometry(f, m, width), covering_isometry(g, m, width)
            ok &= all(a.report().values()) and all(b.report().values())
            _, _, rot = swindle_rotation(a, b)
            ok &= all(rot.values())
    record(6, ok, "1000 random operators: split, support, p=1,2 truncation norms, isometry and rotation identities", t.elapsed, 60)
    assert ok and t.elapsed < 60


# 7 ----------------------------------------------------------------------


def circle_instance(depth):
    sp = FilteredMetricSpace.from_function(range(12), lambda a, b: min(abs(a - b), 12 - abs(a - b)))
    arcs = Cover.from_points(sp, [[0, 1, 2, 3, 4], [4, 5, 6, 7, 8], [8, 9, 10, 11, 0]])
    two = Cover.from_points(sp, [list(range(12)), [8, 9, 10, 11, 0]])
    return build_coarsening([arcs, two, two], depth=depth)


def coarsening_corpus():
    out = {f"circle depth {d}": circle_instance(d) for d in (0, 1, 2)}
    for d in (0, 1, 2):
        out[f"Z[-50,50] 1,4,16 depth {d}"] = build_coarsening(build_anticech(FilteredMetricSpace.integer_interval(-50, 50), [1, 4, 16]), d)
    out["Z[-40,40] 1,3,9,27 depth 0"] = build_coarsening(build_anticech(FilteredMetricSpace.integer_interval(-40, 40), [1, 3, 9, 27]), 0)
    out["Z[-100,100] 1,3,9,27,81 depth 0"] = build_coarsening(build_anticech(FilteredMetricSpace.integer_interval(-100, 100), [1, 3, 9, 27, 81]), 0)
    grid = FilteredMetricSpace.integer_grid(2, -6, 6)
    out["Z^2[-6,6] 1,3,9 depth 0"] = build_coarsening(build_anticech(grid, [1, 3, 9]), 0)
    out["Z^2[-6,6] 1,3,9 depth 1"] = build_coarsening(build_anticech(grid, [1, 3, 9]), 1)
    out["Z^2[-3,3] 1,3 depth 1"] = build_coarsening(build_anticech(FilteredMetricSpace.integer_grid(2, -3, 3), [1, 3]), 1)
    return out


@pytest.fixture(scope="module")
def corpus():
    start = time.perf_counter()
    c = coarsening_corpus()
    return c, time.perf_counter() - start


def contractivity_violations(X):
    n = len(X)
    u, v = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    bad, worst = 0, 0.0
    for t in range(1, X.N + 1):
        f = X.collapse_tables[t - 1]
        bad += int((~X.le(f[u], f[v], u, v)).sum())
        worst = max(worst, float((X.length[f[u], f[v]] - X.length[u, v]).max()))
    return bad, worst


def test_criterion_07_collapsing_maps(corpus):
    instances, build_time = corpus
    ok = True
    failures = []
    with Timer() as t:
        for name, X in instances.items():
            tabs = X.collapse_tables
            n = len(X)
            for t1 in range(1, X.N + 1):
                img = tabs[t1 - 1]
                ok &= bool((X.levels[img] == np.maximum(X.levels, t1)).all())
                for t2 in range(1, X.N + 1):
                    # the larger collapse wins, in either order of composition
                    big = tabs[max(t1, t2) - 1]
                    ok &= bool(np.array_equal(tabs[t2 - 1][img], big))
            if n <= 500:
                bad, worst = contractivity_violations(X)
                if bad:
                    failures.append(f"{name}: {bad} pairs, excess {worst:.3f}")
    elapsed = t.elapsed + build_time
    checked = sum(1 for X in instances.values() if len(X) <= 500)
    detail = f"{len(instances)} instances: semigroup and level laws exact; contractivity on {checked} instances <= 500 nodes"
    if failures:
        detail += "; contractivity FAILS on " + "; ".join(failures)
    record(7, ok and not failures, detail, elapsed, 60)
    assert ok and elapsed < 60


def test_criterion_07_contractive_at_depth_zero_and_on_graphs(corpus):
    instances, _ = corpus
    for name, X in instances.items():
        if len(X) <= 500 and (X.depth == 0 or max(K.dim for K in X.nerves) <= 1):
            assert contractivity_violations(X)[0] == 0, name


@pytest.mark.xfail(strict=True, reason="the affine push of barycentric coordinates is not 1-Lipschitz for the "
                   "spherical metric on simplices of dimension >= 2 (see the decisions ledger)")
def test_criterion_07_contractive_on_subdivided_higher_simplices(corpus):
    instances, _ = corpus
    for name, X in instances.items():
        if len(X) <= 500:
            assert contractivity_violations(X)[0] == 0, name


def test_push_increases_a_spherical_angle():
    # barycenter of a triangle versus vertex 0, after merging vertices 1 and 2
    before = numpy_angle({0: 1, 1: 1, 2: 1}, {0: 1})
    after = numpy_angle({0: 1, 1: 2}, {0: 1})
    assert after > before + 0.15


# 8 ----------------------------------------------------------------------


def test_criterion_08_swindle_hypotheses():
    with Timer() as t:
        X = build_coarsening(build_anticech(FilteredMetricSpace.integer_interval(-100, 100), [1, 3, 9, 27, 81]))
        maps = swindle_sequence(X, 0, 30000)
        rep = check_swindle_hypotheses(maps, X, 0)
        lasts = [e["last_k"] for e in rep["escape"]]
        ok = (
            X.N == 5
            and rep["escape_strictly_increasing"]
            and all(e["escaped"] for e in rep["escape"])
            and rep["control_finite"]
            and rep["step_finite"]
            and all(c["holds"] for c in rep["certificate"])
        )
    detail = f"5 levels, kmax 30000: escape indices {lasts}, {len(rep['control'])}-row control table finite, step bound {rep['step_bound_float']:.3f}"
    record(8, ok, detail, t.elapsed, 30)
    assert ok and t.elapsed < 30


# 9 ----------------------------------------------------------------------


def strict_chains(X, max_len=3):
    subsets = [frozenset(s) for r in range(1, len(X) + 1) for s in itertools.combinations(X, r)]
    chains = [[s] for s in subsets]
    frontier = chains
    for _ in range(max_len - 1):
        frontier = [c + [s] for c in frontier for s in subsets if c[-1] < s]
        chains += frontier
    return chains


def test_criterion_09_theorem317_pipeline():
    count = 0
    ok = True
    with Timer() as t:
        for n in range(1, 9):
            X = tuple(range(n))
            cache: dict = {}
            for chain in strict_chains(X):
                rep = theorem317_report(X, chain, cache)
                ok &= rep["s1_all_surjective"] and rep["s1_kernels_match"] and rep["kernels_equal"] and rep["quotient_matches"]
                count += 1
    record(9, ok, f"{count} strict chains of 1..3 nonempty sets over |X| <= 8", t.elapsed, 60)
    assert ok and t.elapsed < 60


# 10 ---------------------------------------------------------------------

HEXAGON = [[0, i, i % 6 + 1] for i in range(1, 7)]


@pytest.fixture(scope="module")
def trees():
    start = time.perf_counter()
    out = {}
    for name, tops in (("1-simplex", [[0, 1]]), ("2-simplex", [[0, 1, 2]]), ("hexagon", HEXAGON)):
        tree = build_canonical_tree(SimplicialComplex.from_simplices(tops))
        out[name] = (tree, admissibility_report(tree))
    return out, time.perf_counter() - start


def z_intersection_dims(tree, report):
    forks = {f["node"]: f for f in report["forks"]}
    m = tree.ambient.base.dim
    return {k: forks[f"Z_{k}"]["intersection_dim"] for k in range(1, m + 1)}, m


def test_criterion_10_decomposition_trees(trees):
    built, elapsed = trees
    ok = True
    dims_ok = True
    notes = []
    for name, (tree, rep) in built.items():
        ok &= verify_tree_labels(tree)["ok"]
        amb = tree.ambient
        for node, (kind, _) in tree.roles.items():
            if kind in ("Ytilde", "Z"):
                ok &= amb.relatively_connected(tree.nodes[node].label)
        for leaf in rep["leaves"]:
            ok &= leaf["separation_positive"]
        dims, m = z_intersection_dims(tree, rep)
        if any(d != m - 1 for d in dims.values()):
            dims_ok = False
            notes.append(f"{name}: dim(Z_k-1 n Ytilde_k) = {sorted(set(dims.values()))}, expected {m - 1}")
    detail = "labels verified, Ytilde/Z relatively connected, separations > 0 on 1-simplex, 2-simplex, hexagon"
    if notes:
        detail += "; " + "; ".join(notes)
    record(10, ok and dims_ok, detail, elapsed, 60)
    assert ok and elapsed < 60


def test_criterion_10_intersection_dims_in_dimension_two(trees):
    built, _ = trees
    for name in ("2-simplex", "hexagon"):
        dims, m = z_intersection_dims(*built[name])
        assert all(d == m - 1 for d in dims.values()), name


@pytest.mark.xfail(strict=True, reason="Ytilde_k contains the whole 1-skeleton, so for a 1-complex "
                   "Z_0 and Ytilde_1 meet in dimension 1, not 0 (see the decisions ledger)")
def test_criterion_10_intersection_dim_of_the_edge(trees):
    built, _ = trees
    dims, m = z_intersection_dims(*built["1-simplex"])
    assert dims == {1: 0}


# 11 ---------------------------------------------------------------------


def test_criterion_11_mayer_vietoris():
    rng = random.Random(11)
    ok = True
    with Timer() as t:
        for _ in range(200):
            X = [f"x{k}" for k in range(rng.randint(1, 10))]
            Y = set(rng.sample(X, rng.randint(0, len(X))))
            Z = set(X) - Y | set(rng.sample(X, rng.randint(0, len(X))))
            ok &= exactness_check(discrete_mv_chain(Y, Z))["exact"]
    record(11, ok, "200 random decompositions exact at every node", t.elapsed, 10)
    assert ok and t.elapsed < 10
