"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v -s`` or as a script.
"""

from __future__ import annotations

import math
import time

import numpy as np
import pytest

from conftest import record_criterion
from oracles import brute_facets, brute_vertices, lp_min, same_rows, vrep_support
from setlat import fixtures
from setlat.duality import (
    check_maximality,
    dual_objective,
    dual_objective_setlevel,
    in_delta,
    lagrangian,
    primal_solution,
    psep_dual,
    psep_identity,
    scalar_primal,
    solve_strong,
    value_biconjugate,
    value_function,
    weak_duality_check,
)
from setlat.errors import VerificationError
from setlat.generators import (
    non_delta_pairs,
    random_cone,
    random_cone_point,
    random_convex_instance,
    random_dual_pair,
    random_feasible_points,
    random_upper_set,
)
from setlat.geometry import (
    UpperSet,
    contains,
    equal,
    from_hrep,
    halfspace,
    lattice_inf,
    lattice_sup,
    minkowski_add,
    scale,
    support,
    support_discrepancy,
)
from setlat.maps import DualPair, biconjugate, conjugate, facet_directions
from setlat.saddle import (
    Evaluator,
    LagrangianGame,
    SolutionVerdict,
    check_solution,
    default_universes,
    inf_extension,
    is_minimizer,
    saddle_check,
    sup_extension,
)
from setlat.scalarization import phi, scalar_conjugate, scalar_lagrangian
from setlat.tolerances import EPS_GEOM

STRONG_INSTANCES = 50


def _close(a: float, b: float, tol: float) -> bool:
    if math.isinf(a) or math.isinf(b):
        return a == b
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


# ---------------------------------------------------------------------------
# 1. conlinear axioms and lattice laws

def _axiom_failures(A, B, D, s, t):
    C = A.cone
    zero = scale(0.0, A)
    checks = {
        "sum associative": (minkowski_add(minkowski_add(A, B), D), minkowski_add(A, minkowski_add(B, D))),
        "sum commutative": (minkowski_add(A, B), minkowski_add(B, A)),
        "neutral element": (minkowski_add(A, from_hrep(C.dual().generators, np.zeros(len(C.dual().generators)), C)), A),
        "unit scalar": (scale(1.0, A), A),
        "scalar associative": (scale(s, scale(t, A)), scale(s * t, A)),
        "scalar distributes over sum": (scale(s, minkowski_add(A, B)), minkowski_add(scale(s, A), scale(s, B))),
        "zero scalar gives C": (scale(0.0, A), zero),
        "inf commutative": (lattice_inf([A, B]), lattice_inf([B, A])),
        "sup commutative": (lattice_sup([A, B]), lattice_sup([B, A])),
        "inf associative": (lattice_inf([lattice_inf([A, B]), D]), lattice_inf([A, lattice_inf([B, D])])),
        "sup associative": (lattice_sup([lattice_sup([A, B]), D]), lattice_sup([A, lattice_sup([B, D])])),
        "absorption inf-sup": (lattice_inf([A, lattice_sup([A, B])]), A),
        "absorption sup-inf": (lattice_sup([A, lattice_inf([A, B])]), A),
        "inf idempotent": (lattice_inf([A, A]), A),
        "sum distributes over inf": (minkowski_add(A, lattice_inf([B, D])),
                                     lattice_inf([minkowski_add(A, B), minkowski_add(A, D)])),
        "empty is the top": (lattice_sup([A, UpperSet.empty(C)]), UpperSet.empty(C)),
        "full is the bottom": (lattice_inf([A, UpperSet.full(C)]), UpperSet.full(C)),
    }
    if not A.is_empty:
        checks["scalars distribute (convexity)"] = (scale(s + t, A), minkowski_add(scale(s, A), scale(t, A)))
    failures = [name for name, (X, Y) in checks.items() if not equal(X, Y, EPS_GEOM)]
    # order compatibility: inf is a lower and sup an upper bound w.r.t. ⊇
    if not (contains(lattice_inf([A, B]), A) and contains(lattice_inf([A, B]), B)):
        failures.append("inf is a lower bound")
    if not (contains(A, lattice_sup([A, B])) and contains(B, lattice_sup([A, B]))):
        failures.append("sup is an upper bound")
    if contains(A, B) and not equal(lattice_inf([A, B]), A, EPS_GEOM):
        failures.append("order agrees with inf")
    return failures, len(checks) + 3


def test_criterion_1_conlinear_and_lattice_axioms():
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    failures, checks = [], 0
    for _ in range(500):
        q = int(rng.choice([2, 3]))
        C = random_cone(q, rng)
        A, B, D = (random_upper_set(C, rng, special_prob=0.05) for _ in range(3))
        s, t = (float(v) for v in np.round(rng.uniform(0.1, 3.0, size=2), 3))
        bad, n = _axiom_failures(A, B, D, s, t)
        checks += n
        failures += [(name, q) for name in bad]
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < 30.0
    record_criterion(1, ok, f"500 triples, {checks} identities, {len(failures)} failures, {elapsed:.1f} s")
    assert not failures, failures[:5]
    assert elapsed < 30.0


# ---------------------------------------------------------------------------
# 2. oracle equivalence

def _oracle_discrepancy(result: UpperSet, points, rays, C, rng) -> float:
    """Support gap between the computed set (through its facets) and the
    raw generators, plus a facet-set comparison with the brute-force oracle."""
    A, b = result.halfspaces
    oracle_A, oracle_b = brute_facets(points, rays, C.dim)
    if not same_rows(np.hstack([A, b[:, None]]), np.hstack([oracle_A, oracle_b[:, None]]), 1e-7):
        return math.inf
    canonical = from_hrep(A, b, C)
    dirs = [*A, *oracle_A, *C.dual().generators]
    dirs += [random_cone_point(C.dual(), rng) for _ in range(10)]
    worst = 0.0
    for w in dirs:
        ours, ref = support(canonical, w), vrep_support(points, rays, w)
        if math.isinf(ours) or math.isinf(ref):
            if ours != ref:
                return math.inf
            continue
        worst = max(worst, abs(ours - ref))
    return worst


def test_criterion_2_oracle_equivalence():
    rng = np.random.default_rng(2)
    worst = {"lattice_inf": 0.0, "minkowski_add": 0.0, "value_function": 0.0}
    for _ in range(200):
        q = int(rng.choice([2, 3]))
        C = random_cone(q, rng)
        sets = [random_upper_set(C, rng, max_points=6, extra_ray_prob=0.0) for _ in range(int(rng.integers(2, 4)))]
        gens = [(s._vrep_any()[0], s._vrep_any()[1]) for s in sets]
        inf = lattice_inf(sets)
        worst["lattice_inf"] = max(worst["lattice_inf"], _oracle_discrepancy(
            inf, np.vstack([g[0] for g in gens]), np.vstack([g[1] for g in gens]), C, rng))
        A, B = sets[0], sets[1]
        (pa, ra), (pb, rb) = gens[0], gens[1]
        pts = (pa[:, None, :] + pb[None, :, :]).reshape(-1, q)
        worst["minkowski_add"] = max(worst["minkowski_add"], _oracle_discrepancy(
            minkowski_add(A, B), pts, np.vstack([ra, rb]), C, rng))

        inst = random_convex_instance(rng, q=q, n=int(rng.integers(1, 4)), m=int(rng.integers(1, 3)))
        y = np.round(rng.normal(size=inst.m) * 0.3, 3)
        v = value_function(inst, y)
        E, e, _ = inst.section_rows(y)
        section = brute_vertices(-E, -e, inst.n)
        if section is None:
            worst["value_function"] = max(worst["value_function"], 0.0 if v.is_empty else math.inf)
            continue
        piece = inst.f.pieces[0]
        qp, qr = piece.tail._vrep_any()
        img = (section[0] @ piece.F.T + piece.c)
        pts = (img[:, None, :] + qp[None, :, :]).reshape(-1, q)
        rays = np.vstack([section[1] @ piece.F.T, qr]) if section[1].shape[0] else qr
        gap = _oracle_discrepancy(v, pts, rays, inst.C, rng)
        # third leg: scipy LP on the section for a few functionals
        for w in [random_cone_point(inst.C.dual(), rng) for _ in range(3)]:
            ref = lp_min(piece.F.T @ w, E, e) + float(w @ piece.c) + vrep_support(qp, qr, w)
            gap = max(gap, abs(support(v, w) - ref))
        worst["value_function"] = max(worst["value_function"], gap)
    ok = all(w <= 1e-8 for w in worst.values())
    record_criterion(2, ok, "200 instances, max support gaps " +
                     ", ".join(f"{k} {v:.1e}" for k, v in worst.items()))
    assert ok, worst


# ---------------------------------------------------------------------------
# 3. weak duality

def test_criterion_3_weak_duality():
    rng = np.random.default_rng(3)
    checked = violations = disagreements = instances = 0
    control_hits = control_disagreements = 0
    while instances < 100:
        inst = random_convex_instance(rng)
        xs = random_feasible_points(inst, rng, 20)
        if len(xs) < 20:
            continue
        instances += 1
        samples = [(x, random_dual_pair(inst, rng, in_dual_cone=rng.random() < 0.8)) for x in xs]
        rep = weak_duality_check(inst, samples)
        checked += rep.checked
        violations += len(rep.violations)
        disagreements += len(rep.disagreements)
        # negative control: raising every dual offset must be caught by both forms alike
        def raised(pair, inst=inst):
            h = dual_objective(inst, pair)
            if not h.is_proper:
                return halfspace(pair.zstar, 1e3, inst.C)
            return halfspace(pair.zstar, support(h, pair.zstar) + 1e3, inst.C)
        ctrl = weak_duality_check(inst, samples[:2], h=raised)
        control_hits += len(ctrl.violations)
        control_disagreements += len(ctrl.disagreements)
    ok = (checked == 2000 and violations == 0 and disagreements == 0
          and control_hits == 200 and control_disagreements == 0)
    record_criterion(3, ok, f"{checked} samples on 100 instances, {violations} violations, "
                     f"{disagreements} form disagreements; control caught {control_hits}/200")
    assert ok


# ---------------------------------------------------------------------------
# 4. strong duality (the instances are reused by criterion 9)

@pytest.fixture(scope="module")
def strong_runs():
    rng = np.random.default_rng(4)
    runs, start = [], time.perf_counter()
    for _ in range(STRONG_INSTANCES):
        inst = random_convex_instance(rng)
        report, delta = solve_strong(inst)
        others = non_delta_pairs(inst, report.p, delta.pairs, rng, 50) if delta.entries else []
        maximality = check_maximality(inst, report.p, delta.entries, others)
        runs.append((inst, report, delta, others, maximality))
    return runs, time.perf_counter() - start


def test_criterion_4_strong_duality(strong_runs):
    runs, elapsed = strong_runs
    problems = []
    worst = 0.0
    for k, (inst, report, delta, others, maximality) in enumerate(runs):
        if not report.slater:
            problems.append((k, "no Slater certificate"))
        normals = np.vstack([report.p.facet_normals(), report.d.facet_normals()])
        gap = support_discrepancy(report.p, report.d, normals)
        worst = max(worst, gap)
        if gap > 1e-7:
            problems.append((k, f"gap {gap}"))
        if not delta.entries:
            problems.append((k, "Δ empty"))
        for e in delta.entries:
            if in_delta(inst, report.p, e.pair) != (True, True):
                problems.append((k, "Δ entry fails a characterization"))
        if len(others) != 50 or not maximality.passed:
            problems.append((k, f"maximality: {len(others)} samples, passed={maximality.passed}"))
    ok = not problems and elapsed < 120.0
    record_criterion(4, ok, f"{len(runs)} instances, max facet gap {worst:.1e}, "
                     f"{len(problems)} problems, {elapsed:.1f} s")
    assert not problems, problems[:5]
    assert elapsed < 120.0


# ---------------------------------------------------------------------------
# 5. scalarization commutes with Lagrangian, value, conjugate and dual

def _lagrange_oracle(inst, pair) -> float:
    """``inf_x lambda_{z*}(x, y*)`` by scipy over ``dom f``."""
    piece, gp = inst.f.pieces[0], inst.g_piece
    z, y = pair.zstar, pair.ystar
    sq = support(piece.tail, z)
    sg = support(gp.tail, y)
    if sg == -math.inf:
        return -math.inf
    c = piece.F.T @ z + gp.F.T @ y
    return lp_min(c, inst.f.E, inst.f.e) + float(z @ piece.c) + sq + float(y @ gp.c) + sg


def test_criterion_5_scalarization_commutes():
    rng = np.random.default_rng(5)
    worst = {"lagrangian": 0.0, "value": 0.0, "conjugate": 0.0, "dual": 0.0}
    counts = dict.fromkeys(worst, 0)
    while min(counts.values()) < 100:
        inst = random_convex_instance(rng)
        x = random_feasible_points(inst, rng, 1)
        if not x:
            continue
        x = x[0]
        pair = random_dual_pair(inst, rng)
        z, y = pair.zstar, pair.ystar
        # Lagrangian: support of the set-valued Lagrangian = scalar Lagrangian
        a, b = support(lagrangian(inst, x, pair), z), scalar_lagrangian(inst, z, x, y)
        worst["lagrangian"] = max(worst["lagrangian"], 0.0 if _close(a, b, 1e-9) else abs(a - b))
        counts["lagrangian"] += 1
        # value: support of the value function = scalar problem value
        ydir = np.round(rng.normal(size=inst.m) * 0.2, 3)
        a, b = support(value_function(inst, ydir), z), scalar_primal(inst, z, ydir).value
        worst["value"] = max(worst["value"], 0.0 if _close(a, b, 1e-9) else abs(a - b))
        counts["value"] += 1
        # conjugate: support of -f*(x*, z*) = scalar conjugate of phi_{f,z*}
        xstar = rng.normal(size=inst.n)
        a, b = support(conjugate(inst.f, xstar, z), z), scalar_conjugate(inst.f, z, xstar)
        worst["conjugate"] = max(worst["conjugate"], 0.0 if _close(a, b, 1e-9) else abs(a - b))
        counts["conjugate"] += 1
        # dual: phi_{h,z*}(y*) = inf_x lambda_{z*}(x, y*), three independent routes
        h1 = support(dual_objective(inst, pair), z)
        h2 = support(dual_objective_setlevel(inst, pair), z)
        h3 = _lagrange_oracle(inst, pair)
        gap = max(0.0 if _close(h1, h2, 1e-9) else abs(h1 - h2), 0.0 if _close(h1, h3, 1e-9) else abs(h1 - h3))
        worst["dual"] = max(worst["dual"], gap)
        counts["dual"] += 1
    ok = all(v == 0.0 for v in worst.values())
    record_criterion(5, ok, "100 samples per identity at 1e-9, worst " +
                     ", ".join(f"{k} {v:.1e}" for k, v in worst.items()))
    assert ok, worst


# ---------------------------------------------------------------------------
# 6. Fenchel-Moreau and the biconjugate of the value function

def test_criterion_6_fenchel_moreau():
    rng = np.random.default_rng(6)
    failures, checked = [], 0
    for k in range(30):
        inst = random_convex_instance(rng)
        f = inst.f
        inside = random_feasible_points(inst, rng, 4)
        dom = f.domain_vrep()
        inside += list(dom[0][:2])
        for x in inside:
            checked += 1
            if not equal(biconjugate(f, x, facet_directions(f, x)), f.value(x), EPS_GEOM):
                failures.append((k, "biconjugate", x))
        outside = dom[0][0] * 1.5 + 0.1 * np.sign(dom[0][0])
        if f.in_domain(outside):
            outside = dom[0][0] * 3.0
        dirs = facet_directions(f, inside[0])
        checked += 1
        if not biconjugate(f, outside, dirs).is_empty:
            failures.append((k, "outside domain", outside))
        report, delta = solve_strong(inst)
        vb = value_biconjugate(inst, delta.pairs)
        checked += 1
        if not (equal(vb, report.d, EPS_GEOM) and equal(vb, report.p, EPS_GEOM)):
            failures.append((k, "value biconjugate", None))
    ok = not failures
    record_criterion(6, ok, f"30 instances, {checked} set equalities, {len(failures)} failures")
    assert ok, failures[:5]


# ---------------------------------------------------------------------------
# 7. the one-parameter segment example

def test_criterion_7_segment_example():
    f = fixtures.segment_map()
    grid = fixtures.segment_grid(0.0, 5.0, 0.1)
    ev = Evaluator(f)
    minimal = {round(float(x[0]), 6) for x in grid if is_minimizer(ev, x, grid)}
    expected = set(fixtures.SEGMENT_FULL_SOLUTION)
    not_minimal_ok = not minimal & {0.5, 1.0, 1.5, 2.0}

    def points(ts):
        return [np.array([t]) for t in ts]

    pair = check_solution(ev, points(fixtures.SEGMENT_SOLUTION), grid, "min")
    full = check_solution(ev, points(fixtures.SEGMENT_FULL_SOLUTION), grid, "min")
    ok = (minimal == expected and not_minimal_ok and pair is SolutionVerdict.SOLUTION
          and full is SolutionVerdict.FULL_SOLUTION)
    record_criterion(7, ok, f"grid-minimal {sorted(minimal)}; {{0, 3}} -> {pair.value}; "
                     f"{{0}} ∪ {{2.1..3.0}} -> {full.value}")
    assert minimal == expected
    assert not_minimal_ok
    assert pair is SolutionVerdict.SOLUTION
    assert full is SolutionVerdict.FULL_SOLUTION


# ---------------------------------------------------------------------------
# 8. separable problem

def test_criterion_8_separable_identity():
    rng = np.random.default_rng(8)
    ps = fixtures.psep_fixture()
    inst = ps.instance
    worst_dual = 0.0
    for _ in range(50):
        v = -np.abs(rng.normal(size=ps.b.size)) * rng.uniform(0.0, 3.0)
        if rng.random() < 0.2:
            v = -v  # positive entries: both sides are Z
        w = random_cone_point(inst.C.dual(), rng)
        mine = psep_dual(ps, v, w, check=False)
        generic = dual_objective(inst, DualPair(-v, w))
        worst_dual = max(worst_dual, support_discrepancy(mine, generic, [w, *inst.C.dual().generators])
                         if mine.is_proper or generic.is_proper else (0.0 if mine.tag == generic.tag else math.inf))
    rows = psep_identity(ps)
    worst_id = max(abs(lhs - rhs) for _, lhs, rhs in rows)
    ok = worst_dual <= 1e-8 and worst_id <= 1e-7 and len(rows) > 0
    record_criterion(8, ok, f"50 (v, w): max dual gap {worst_dual:.1e}; identity on {len(rows)} "
                     f"facet normals, max gap {worst_id:.1e}")
    assert ok


# ---------------------------------------------------------------------------
# 9. saddle sets and solutions

def _perturbations(inst, Xbar, Vbar, game, rng, want: int, max_tries: int = 400):
    """Candidate pairs built by perturbing the solution, kept when the
    solution-side verdict (primal solution, dual solution, zero gap) is false."""
    X, V = list(game.X), list(game.V)
    p_ev, d_ev = game.p_ev, game.d_ev
    C = inst.C
    out = []
    for _ in range(max_tries):
        if len(out) >= want:
            break
        kind = int(rng.integers(5))
        Xc, Vc = list(Xbar), list(Vbar)
        if kind == 0:
            Xc = Xc + [X[int(rng.integers(len(X)))]]
        elif kind == 1:
            Vc = Vc + [V[int(rng.integers(len(V)))]]
        elif kind == 2 and len(Vc) > 1:
            Vc.pop(int(rng.integers(len(Vc))))
        elif kind == 3:
            Xc = [X[int(rng.integers(len(X)))] for _ in range(int(rng.integers(1, 3)))]
        else:
            Vc = [V[int(rng.integers(len(V)))]]
        primal = check_solution(p_ev, Xc, game.X, "min")
        dual = check_solution(d_ev, Vc, game.V, "max")
        gap_zero = equal(inf_extension(p_ev, game.X, C), sup_extension(d_ev, game.V, C))
        if primal is SolutionVerdict.NOT or dual is SolutionVerdict.NOT or not gap_zero:
            out.append((Xc, Vc))
    return out


def test_criterion_9_saddle_equivalence(strong_runs):
    runs, _ = strong_runs
    rng = np.random.default_rng(9)
    problems, rejected, mismatches = [], 0, 0
    for k, (inst, report, delta, _, _) in enumerate(runs):
        Xbar = primal_solution(inst, report.p)
        X_u, V_u = default_universes(inst, delta.pairs, rng)
        game = LagrangianGame(inst, list(X_u) + Xbar, V_u)
        try:
            verdict = saddle_check(inst, Xbar, delta.pairs, None, None, game=game)
        except VerificationError as exc:
            mismatches += 1
            problems.append((k, str(exc)))
            continue
        if not verdict.is_saddle:
            problems.append((k, "solution pair is not a saddle set"))
        perturbed = _perturbations(inst, Xbar, delta.pairs, game, rng, 20)
        if len(perturbed) < 20:
            problems.append((k, f"only {len(perturbed)} non-solutions generated"))
        for Xc, Vc in perturbed:
            try:
                v = saddle_check(inst, Xc, Vc, None, None, game=game)
            except VerificationError as exc:
                mismatches += 1
                problems.append((k, str(exc)))
                continue
            if v.is_saddle:
                problems.append((k, "perturbed non-solution accepted"))
            else:
                rejected += 1
    ok = not problems
    record_criterion(9, ok, f"{len(runs)} instances: solution pairs are saddle sets, {rejected} "
                     f"perturbed non-solutions rejected, {mismatches} (b)/equality or verdict mismatches")
    assert ok, problems[:5]


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v", "-s"]))
