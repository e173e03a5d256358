"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
report lines.
"""

import itertools

import numpy as np
import pytest

import convexsem.convexalg as ca
from convexsem.convexalg import (
    Box,
    HalfspaceRegion,
    Trajectory,
    VertexHull,
    hull,
    mix,
    mix_trajectories,
    sample_point,
)
from convexsem.feasibility import maximize
from convexsem.lexicon import builtin_food, builtin_robot
from convexsem.pregroup import Wiring, parse_type, reduce
from convexsem.relsem import (
    FinRel,
    Relation,
    probe_equal,
    probe_points,
    snake_equations_hold,
    spider,
    evaluate,
)

from helpers import enumerate_vertices, food_tree, grid_hull_distance, random_join_semilattice


@pytest.fixture(scope="module")
def food():
    return builtin_food()


@pytest.fixture(scope="module")
def robot():
    return builtin_robot()


def report(num, ok, text):
    print(f"ACCEPTANCE {num:>2} {'PASS' if ok else 'FAIL'}: {text}")
    assert ok, text


def test_criterion_01_bananas_taste_sweet(food):
    got = food.evaluate_phrase("bananas taste sweet").relation.finite_enumeration()
    ok = got == frozenset({("(1,1)",), ("(1,0)",)})
    report(1, ok, f"'bananas taste sweet' = {sorted(got)} (expected exactly (1,1) and (1,0))")


def test_criterion_02_beer_tastes_sweet(food):
    got = food.evaluate_phrase("beer tastes sweet").relation.finite_enumeration()
    ok = got == frozenset({("(0,1)",)})
    report(2, ok, f"'beer tastes sweet' = {sorted(got)} (expected exactly (0,1))")


def test_criterion_03_fruit_which_tastes_bitter(food):
    res = food.evaluate_phrase("fruit which tastes bitter").relation
    gb = Relation(food.noun_object, (food.properties["green_banana_n"],))
    probes = probe_points(food.noun_object, 900, seed=303)
    rng = np.random.default_rng(304)
    for cell, count in ((res.cells[0], 60), (gb.cells[0], 60)):
        for _ in range(count):
            p = sample_point(cell, rng)
            if p is not None:
                probes.append(p)
    verdict = probe_equal(res, gb, probes, tol=1e-7)
    ok = verdict.equal and len(probes) >= 1000
    report(
        3,
        ok,
        f"'fruit which tastes bitter' probe-equals green banana on {len(probes)} probes"
        + ("" if verdict.equal else f"; first mismatch {verdict.counterexample}"),
    )


PRINTED_YELLOW_BANANA_COLOUR = [
    # 0.9 R <= G <= 1.5 R, R >= 0.7, G >= 0.7, B <= 0.1
    (np.array([0.9, -1.0, 0.0]), 0.0),
    (np.array([-1.5, 1.0, 0.0]), 0.0),
    (np.array([-1.0, 0.0, 0.0]), -0.7),
    (np.array([0.0, -1.0, 0.0]), -0.7),
    (np.array([0.0, 0.0, 1.0]), 0.1),
]


def test_criterion_04_yellow_banana_colour(food):
    res = food.evaluate_phrase("yellow banana").relation
    assert len(res.cells) == 1
    cell = res.cells[0]
    system = cell.system()
    # (a) every printed row is implied by the evaluated cell: its maximal
    # violation over the cell is nonpositive.
    implied = True
    for coeffs, rhs in PRINTED_YELLOW_BANANA_COLOUR:
        obj = np.zeros(cell.n_vars)
        obj[:3] = coeffs
        r = maximize(obj, system)
        implied &= r.status == "optimal" and r.value <= rhs + 1e-7
    # (b) every extreme point of the printed system (within the colour cube),
    # producted with the banana's other factors' extreme points, lies in the
    # evaluated cell; by convexity this gives the reverse inclusion.
    cube_a = np.vstack([np.eye(3), -np.eye(3)])
    cube_b = np.concatenate([np.ones(3), np.zeros(3)])
    printed_a = np.vstack([c for c, _ in PRINTED_YELLOW_BANANA_COLOUR] + [cube_a])
    printed_b = np.concatenate([[b for _, b in PRINTED_YELLOW_BANANA_COLOUR], cube_b])
    colour_vertices = enumerate_vertices(printed_a, printed_b)
    taste_vertices = [np.array(v) for v in
                      ([1, 0, 0, 0], [0.25, 0, 0.75, 0], [0.7, 0.3, 0, 0])]
    contained = bool(colour_vertices)
    for cv, tv, tex, shp in itertools.product(
        colour_vertices, taste_vertices, (0.2, 0.5), (0.0, 0.25)
    ):
        point = (cv, tv, np.array([tex]), np.array([shp]))
        contained &= res.contains(point, 1e-7)
    ok = implied and contained
    report(
        4,
        ok,
        "'yellow banana' colour factor equals the expected reduced system "
        f"(rows implied: {implied}; {len(colour_vertices)} vertex products contained: {contained})",
    )


def test_criterion_05_soft_apple_texture(food):
    res = food.evaluate_phrase("soft apple").relation
    live = [c for c in res.cells if not c.is_empty()]
    assert len(live) == 1
    cell = live[0]
    obj = np.zeros(cell.n_vars)
    obj[cell.factor_slices[2].start] = 1.0
    hi = maximize(obj, cell.system()).value
    lo = -maximize(-obj, cell.system()).value
    ok = abs(lo - 0.5) <= 1e-7 and abs(hi - 0.6) <= 1e-7
    report(5, ok, f"'soft apple' texture factor = [{lo:.9f}, {hi:.9f}] (expected [0.5, 0.6])")


def test_criterion_06_transitive_reduction():
    w = reduce([parse_type("n"), parse_type("n^r s n^l"), parse_type("n")], parse_type("s"))
    ok = w.cups == frozenset({(0, 1), (3, 4)}) and w.outputs == (2,)
    report(6, ok, f"reduce(n . n^r s n^l . n -> s) cups = {sorted(w.cups)}")


def test_criterion_07_snake_equations():
    ok = snake_equations_hold(food_tree())
    rng = np.random.default_rng(707)
    sizes = []
    for _ in range(20):
        lat = random_join_semilattice(rng)
        sizes.append(len(lat.elements))
        ok &= len(lat.elements) <= 8 and snake_equations_hold(lat)
    report(7, ok, f"snake equations hold on the food tree and 20 random lattices (sizes {sizes})")


def test_criterion_08_spider_fusion(food):
    lat = food.domains["outcome"]
    mu = FinRel.spider((lat,), 2, 1)
    fused_exact = mu.tensor(FinRel.identity((lat,))).then(mu)
    exact_ok = fused_exact.pairs == FinRel.spider((lat,), 3, 1).pairs

    noun = food.noun_object
    mu_rel = spider(noun, 2, 1)
    w = Wiring(n_wires=6, cups=frozenset({(2, 3)}), outputs=(0, 1, 4, 5))
    composite = evaluate(w, [mu_rel, mu_rel], [noun] * 6)
    fused = spider(noun, 3, 1)
    base = probe_points(noun, 260, seed=808)
    probes = [p * 4 for p in base[:250]]
    rng = np.random.default_rng(809)
    while len(probes) < 500:
        parts = [base[rng.integers(len(base))] for _ in range(4)]
        probes.append(tuple(x for part in parts for x in part))
    verdict = probe_equal(composite, fused, probes, tol=1e-7)
    ok = exact_ok and verdict.equal
    report(
        8,
        ok,
        f"spider fusion: exact on the outcome lattice ({exact_ok}), "
        f"{len(probes)} probes on the noun space ({verdict.equal})",
    )


def test_criterion_09_trajectory_convexity(robot):
    res = robot.evaluate_phrase("cathy moves to the living room").relation
    nonempty = not res.is_empty()
    live = [c for c in res.cells if not c.is_empty()]
    rng = np.random.default_rng(909)
    failures = 0
    for _ in range(500):
        p = sample_point(live[rng.integers(len(live))], rng)
        q = sample_point(live[rng.integers(len(live))], rng)
        t = float(rng.uniform())
        mixed_traj = mix_trajectories(t, p[2], q[2])
        traj_ok = any(c.path_parts[2].contains(mixed_traj, 1e-7) for c in live)
        full_mid = ca.mix_points(res.shape.factors, [t, 1 - t], [p, q])
        failures += 0 if (traj_ok and res.contains(full_mid, 1e-7)) else 1
    ok = nonempty and failures == 0
    report(
        9,
        ok,
        f"'cathy moves to the living room' nonempty ({nonempty}); "
        f"500 random trajectory mixtures all contained (failures: {failures})",
    )


def test_criterion_10_convex_algebra_laws():
    colour = Box(("R", "G", "B"), ((0.0, 1.0),) * 3)
    taste = VertexHull(("t_sweet", "t_sour", "t_bitter", "t_salt"))
    slab = HalfspaceRegion(("u", "v"), (((1.0, 1.0), "<=", 2.0),))
    paths = ca.PathDomain(Box(("x1", "x2"), ((0.0, 10.0),) * 2), 4)
    tree = food_tree()

    # Unit law, exactly, on every variant.
    unit_ok = True
    pt = np.array([0.1, 0.2, 0.3])
    unit_ok &= np.array_equal(mix(colour, [1.0], [pt]), pt)
    unit_ok &= np.array_equal(mix(slab, [1.0], [np.array([0.5, 0.5])]), np.array([0.5, 0.5]))
    tastept = np.array([0.4, 0.3, 0.2, 0.1])
    unit_ok &= np.array_equal(mix(taste, [1.0], [tastept]), tastept)
    unit_ok &= mix(tree, [1.0], ["apples"]) == "apples"
    f = Trajectory(-1.5, np.arange(8.0).reshape(4, 2))
    g = mix(paths, [1.0], [f])
    unit_ok &= g.t_start == f.t_start and np.array_equal(g.waypoints, f.waypoints)

    # Flattening law within 1e-9 on 1000 random continuous instances.
    rng = np.random.default_rng(1010)
    worst = 0.0
    for _ in range(1000):
        domain = colour if rng.uniform() < 0.5 else taste
        dim = domain.dim
        if isinstance(domain, VertexHull):
            pts = [rng.dirichlet(np.ones(dim)) for _ in range(4)]
        else:
            pts = [rng.uniform(size=dim) for _ in range(4)]
        q1, q2 = rng.dirichlet(np.ones(2)), rng.dirichlet(np.ones(2))
        p = rng.dirichlet(np.ones(2))
        nested = mix(domain, p, [mix(domain, q1, pts[:2]), mix(domain, q2, pts[2:])])
        flat = mix(domain, np.concatenate([p[0] * q1, p[1] * q2]), pts)
        worst = max(worst, float(np.abs(nested - flat).max()))
    flatten_ok = worst <= 1e-9

    # Exhaustive on finite lattices with <= 8 elements.
    finite_ok = True
    rng = np.random.default_rng(1011)
    lattices = [tree] + [random_join_semilattice(rng) for _ in range(3)]
    for lat in lattices:
        for a, b, c in itertools.product(lat.elements, repeat=3):
            nested = mix(lat, [0.5, 0.5], [mix(lat, [0.5, 0.5], [a, b]), c])
            nested2 = mix(lat, [0.5, 0.5], [a, mix(lat, [0.5, 0.5], [b, c])])
            flat = mix(lat, [0.25, 0.25, 0.5], [a, b, c])
            finite_ok &= nested == flat == nested2
    ok = unit_ok and flatten_ok and finite_ok
    report(
        10,
        ok,
        f"mixing laws: unit exact ({unit_ok}), flattening worst residual {worst:.2e} "
        f"on 1000 instances ({flatten_ok}), exhaustive on finite lattices ({finite_ok})",
    )


def test_criterion_11_hull_membership_vs_grid_oracle():
    taste = VertexHull(("t_sweet", "t_sour", "t_bitter", "t_salt"))
    vertices = np.eye(4)
    cell = hull(taste, vertices)
    rng = np.random.default_rng(1111)
    step = 0.01
    disagreements = 0
    checked = 0
    for _ in range(200):
        mode = rng.uniform()
        if mode < 0.4:
            q = rng.dirichlet(np.ones(4))  # interior
        elif mode < 0.7:
            q = rng.dirichlet(np.ones(4)) + rng.normal(scale=0.05, size=4)  # near boundary
        else:
            q = rng.uniform(-0.2, 1.0, size=4)  # mostly far outside
        member = cell.contains((q,), 1e-9)
        dist = grid_hull_distance(q, vertices, step=step)
        checked += 1
        if member and dist > 2 * step:
            disagreements += 1
        if not member and dist <= 1e-12:
            disagreements += 1
    ok = disagreements == 0 and checked == 200
    report(
        11,
        ok,
        f"hull membership vs dense weight-grid oracle on {checked} taste-simplex queries "
        f"(disagreements beyond grid resolution: {disagreements})",
    )
