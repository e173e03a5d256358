import numpy as np
import pytest

from convexsem import convexalg as ca
from convexsem.convexalg import (
    Box,
    FiniteSemilattice,
    HalfspaceRegion,
    PathConstraint,
    PathDomain,
    Trajectory,
    VertexHull,
    from_inequalities,
    full,
    hull,
    hull_union,
    intersect,
    join_closure,
    mix,
    mix_points,
    mix_trajectories,
    product,
    sample_point,
)
from convexsem.errors import (
    CarrierError,
    DimensionMismatch,
    LatticeError,
    ShapeMismatch,
    WeightSumError,
)

from helpers import food_tree

COLOUR = Box(("R", "G", "B"), (((0.0, 1.0),) * 3))
TASTE = VertexHull(("t_sweet", "t_sour", "t_bitter", "t_salt"))
TEXTURE = Box(("tex",), ((0.0, 1.0),))
LOCATION = Box(("x1", "x2"), ((0.0, 10.0), (0.0, 10.0)))
PATHS = PathDomain(LOCATION, k=8)

BANANA_TASTE = [[1, 0, 0, 0], [0.25, 0, 0.75, 0], [0.7, 0.3, 0, 0]]


def bits2():
    els = ["00", "01", "10", "11"]
    bj = lambda a, b: "".join(str(max(int(x), int(y))) for x, y in zip(a, b))
    return FiniteSemilattice(els, {(a, b): bj(a, b) for a in els for b in els if a < b})


class TestMix:
    def test_tree_mix_is_join(self):
        assert mix(food_tree(), [0.5, 0.5], ["apples", "bananas"]) == "fruit"

    def test_unit_law_every_variant(self):
        assert np.allclose(mix(COLOUR, [1.0], [np.array([0.2, 0.4, 0.9])]), [0.2, 0.4, 0.9])
        hs = HalfspaceRegion(("u", "v"), (((1.0, 1.0), "<=", 10.0),))
        assert np.allclose(mix(hs, [1.0], [np.array([1.0, 2.0])]), [1.0, 2.0])
        assert np.allclose(mix(TASTE, [1.0], [np.array([0.25, 0.25, 0.25, 0.25])]), [0.25] * 4)
        assert mix(food_tree(), [1.0], ["beer"]) == "beer"
        f = Trajectory(-2.0, np.zeros((8, 2)))
        g = mix(PATHS, [1.0], [f])
        assert g.t_start == f.t_start and np.array_equal(g.waypoints, f.waypoints)

    def test_rgb_midpoint(self):
        out = mix(COLOUR, [0.5, 0.5], [np.array([1.0, 0, 0]), np.array([0.0, 0, 1.0])])
        assert np.allclose(out, [0.5, 0, 0.5])

    def test_semilattice_weights_discarded(self):
        lat = bits2()
        a = mix(lat, [0.9, 0.1], ["01", "10"])
        b = mix(lat, [0.001, 0.999], ["01", "10"])
        assert a == b == "11"

    def test_zero_weight_drops_from_support(self):
        assert mix(food_tree(), [1.0, 0.0], ["apples", "beer"]) == "apples"

    def test_weight_sum_error(self):
        with pytest.raises(WeightSumError):
            mix(COLOUR, [0.5, 0.6], [np.zeros(3), np.zeros(3)])

    def test_carrier_error(self):
        with pytest.raises(CarrierError):
            mix(COLOUR, [1.0], [np.array([2.0, 0, 0])])
        with pytest.raises(CarrierError):
            mix(food_tree(), [1.0], ["vodka"])

    def test_flattening_law_continuous(self):
        rng = np.random.default_rng(1)
        for _ in range(200):
            pts = [rng.uniform(size=3) for _ in range(4)]
            q1, q2 = rng.dirichlet(np.ones(2)), rng.dirichlet(np.ones(2))
            p = rng.dirichlet(np.ones(2))
            inner1 = mix(COLOUR, q1, pts[:2])
            inner2 = mix(COLOUR, q2, pts[2:])
            nested = mix(COLOUR, p, [inner1, inner2])
            flat_w = np.concatenate([p[0] * q1, p[1] * q2])
            flat = mix(COLOUR, flat_w, pts)
            assert np.abs(nested - flat).max() <= 1e-9

    def test_flattening_law_semilattice_exhaustive(self):
        lat = food_tree()
        els = lat.elements
        for a in els:
            for b in els:
                for c in els:
                    nested = mix(lat, [0.5, 0.5], [mix(lat, [0.5, 0.5], [a, b]), c])
                    flat = mix(lat, [0.25, 0.25, 0.5], [a, b, c])
                    assert nested == flat


class TestJoinClosure:
    def test_tree_example(self):
        assert join_closure(food_tree(), ["apples", "bananas"]) == {"apples", "bananas", "fruit"}

    def test_singleton_closed(self):
        assert join_closure(bits2(), ["10"]) == {"10"}

    def test_pairwise_fixpoint(self):
        assert join_closure(bits2(), ["10", "01"]) == {"10", "01", "11"}


class TestLattices:
    def test_tree_lca_join(self):
        lat = food_tree()
        assert lat.join("apples", "beer") == "food"
        assert lat.join("bananas", "fruit") == "fruit"

    def test_bad_table_rejected(self):
        with pytest.raises(LatticeError):
            FiniteSemilattice(["a", "b"], {("a", "b"): "c"})
        with pytest.raises(LatticeError):
            # join(a,b)=a but join(b,c)=b, join(a,c)=c breaks associativity
            FiniteSemilattice(
                ["a", "b", "c"],
                {("a", "b"): "a", ("b", "c"): "b", ("a", "c"): "c"},
            )

    def test_two_roots_rejected(self):
        with pytest.raises(LatticeError):
            FiniteSemilattice.from_tree({"a": "r1", "b": "r2"})


class TestHull:
    def test_taste_simplex_from_unit_vectors(self):
        cell = hull(TASTE, np.eye(4))
        assert cell.contains((np.array([0.25, 0.25, 0.25, 0.25]),))
        assert cell.contains((np.array([1.0, 0, 0, 0]),))
        assert not cell.contains((np.array([0.5, 0.5, 0.5, -0.5]),))

    def test_singleton(self):
        p = np.array([0.2, 0.3, 0.5, 0.0])
        cell = hull(TASTE, [p])
        assert cell.contains((p,))
        assert not cell.contains((np.array([0.3, 0.2, 0.5, 0.0]),))

    def test_banana_taste_membership(self):
        cell = hull(TASTE, BANANA_TASTE)
        assert cell.contains((np.array([0.65, 0.0, 0.35, 0.0]),))
        assert not cell.contains((np.array([0.0, 0.0, 0.0, 1.0]),))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            hull(TASTE, [[1.0, 0.0]])

    def test_agrees_with_grid_oracle_small(self):
        from helpers import grid_hull_distance

        verts = np.array(BANANA_TASTE, dtype=float)
        cell = hull(TASTE, verts)
        rng = np.random.default_rng(5)
        for _ in range(40):
            if rng.uniform() < 0.5:
                lam = rng.dirichlet(np.ones(3))
                q = lam @ verts
            else:
                q = rng.dirichlet(np.ones(4))
            member = cell.contains((q,), 1e-9)
            dist = grid_hull_distance(q, verts, step=0.02)
            if member:
                assert dist <= 0.05
            else:
                assert dist > 1e-9


class TestRegions:
    def test_yellow_probe(self):
        yellow = from_inequalities(
            COLOUR,
            [ ((-1.0, 0, 0), "<=", -0.7), ((0, -1.0, 0), "<=", -0.7), ((0, 0, 1.0), "<=", 0.5) ],
        )
        assert yellow.contains((np.array([0.8, 0.9, 0.2]),))
        assert not yellow.contains((np.array([0.6, 0.9, 0.2]),))

    def test_zero_constraints_full_box(self):
        cell = from_inequalities(COLOUR, [])
        assert cell.contains((np.array([1.0, 1.0, 1.0]),))
        assert not cell.contains((np.array([1.1, 0.0, 0.0]),))  # outside the carrier

    def test_contradiction_is_empty(self):
        cell = from_inequalities(
            Box(("x",), ((0.0, 1.0),)),
            [((-1.0,), "<=", -0.7), ((1.0,), "<=", 0.3)],
        )
        assert cell.is_empty()


class TestIntersect:
    def test_denotational_correctness(self):
        rng = np.random.default_rng(9)
        d = Box(("x", "y"), ((0.0, 1.0), (0.0, 1.0)))
        for _ in range(20):
            a = from_inequalities(d, [(rng.normal(size=2), "<=", float(rng.normal()) + 0.5)])
            b = from_inequalities(d, [(rng.normal(size=2), "<=", float(rng.normal()) + 0.5)])
            both = intersect(a, b)
            for _ in range(25):
                p = (rng.uniform(size=2),)
                assert both.contains(p) == (a.contains(p) and b.contains(p))

    def test_sweet_meets_bitter_on_shared_face(self):
        sweet = from_inequalities(
            TASTE,
            [((-1.0, 1.0, 0, 0), "<=", 0.0), ((-1.0, 0, 1.0, 0), "<=", 0.0), ((-1.0, 0, 0, 1.0), "<=", 0.0)],
        )
        bitter = from_inequalities(
            TASTE,
            [((1.0, 0, -1.0, 0), "<=", 0.0), ((0, 1.0, -1.0, 0), "<=", 0.0), ((0, 0, -1.0, 1.0), "<=", 0.0)],
        )
        both = intersect(sweet, bitter)
        assert not both.is_empty()
        assert both.contains((np.array([0.5, 0.0, 0.5, 0.0]),))

    def test_intersect_with_full_is_identity(self):
        rng = np.random.default_rng(2)
        cell = hull(TASTE, BANANA_TASTE)
        both = intersect(cell, full((TASTE,)))
        for _ in range(30):
            q = (rng.dirichlet(np.ones(4)),)
            assert both.contains(q) == cell.contains(q)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            intersect(full((COLOUR,)), full((TASTE,)))


class TestProduct:
    def test_banana_assembly(self):
        colour_part = from_inequalities(
            COLOUR,
            [((0.9, -1.0, 0), "<=", 0.0), ((-1.5, 1.0, 0), "<=", 0.0),
             ((-1.0, 0, 0), "<=", -0.3), ((0, 0, 1.0), "<=", 0.1)],
        )
        taste_part = hull(TASTE, BANANA_TASTE)
        tex_part = from_inequalities(TEXTURE, [((-1.0,), "<=", -0.2), ((1.0,), "<=", 0.5)])
        banana = product(product(colour_part, taste_part), tex_part)
        assert banana.domains == (COLOUR, TASTE, TEXTURE)
        good = (np.array([0.5, 0.5, 0.05]), np.array([1.0, 0, 0, 0]), np.array([0.3]))
        assert banana.contains(good)
        bad = (np.array([0.5, 0.5, 0.05]), np.array([1.0, 0, 0, 0]), np.array([0.7]))
        assert not banana.contains(bad)

    def test_unit_cell_is_neutral(self):
        cell = hull(TASTE, BANANA_TASTE)
        assert product(cell, ca.unit_cell()).domains == cell.domains

    def test_point_pair(self):
        x = Box(("x",), ((0.0, 1.0),))
        a = from_inequalities(x, [((1.0,), "=", 0.25)])
        b = from_inequalities(x, [((1.0,), "=", 0.75)])
        pair = product(a, b)
        assert pair.contains((np.array([0.25]), np.array([0.75])))
        assert not pair.contains((np.array([0.75]), np.array([0.25])))


class TestHullUnion:
    def test_one_dimensional_gap_filled(self):
        x = Box(("x",), ((0.0, 10.0),))
        a = from_inequalities(x, [((1.0,), "<=", 1.0)])
        b = from_inequalities(x, [((-1.0,), "<=", -2.0), ((1.0,), "<=", 3.0)])
        h = hull_union([a, b])
        for v, expect in [(0.5, True), (1.5, True), (2.5, True), (3.5, False)]:
            assert h.contains((np.array([v]),)) == expect

    def test_contains_mixture_of_members(self):
        rng = np.random.default_rng(3)
        a = hull(TASTE, BANANA_TASTE)
        b = hull(TASTE, [[0, 0, 1, 0], [0.7, 0, 0.3, 0], [0, 0.6, 0.4, 0]])
        h = hull_union([a, b])
        for _ in range(25):
            pa = sample_point(a, rng)[0]
            pb = sample_point(b, rng)[0]
            t = rng.uniform()
            assert h.contains((t * pa + (1 - t) * pb,), 1e-7)


class TestTrajectories:
    def path_cell(self):
        start = from_inequalities(LOCATION, [((1.0, 0.0), "<=", 5.0)])
        end = from_inequalities(LOCATION, [((-1.0, 0.0), "<=", -5.0)])
        pc = PathConstraint(start, end, -ca.STRICT_EPS, False)
        return ca._finalize((PATHS,), 0, [], [], [], {}, {0: pc})

    def test_mix_p1_is_first(self):
        f1 = Trajectory(-2.0, np.random.default_rng(0).uniform(0, 10, (8, 2)))
        f2 = Trajectory(-4.0, np.random.default_rng(1).uniform(0, 10, (8, 2)))
        g = mix_trajectories(1.0, f1, f2)
        assert g.t_start == f1.t_start and np.array_equal(g.waypoints, f1.waypoints)

    def test_midpoint_start_time(self):
        f1 = Trajectory(-2.0, np.zeros((8, 2)))
        f2 = Trajectory(-4.0, np.zeros((8, 2)))
        assert mix_trajectories(0.5, f1, f2).t_start == pytest.approx(-3.0)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            mix_trajectories(0.5, Trajectory(-1, np.zeros((8, 2))), Trajectory(-1, np.zeros((4, 2))))

    def test_members_mix_into_members(self):
        cell = self.path_cell()
        rng = np.random.default_rng(17)
        for _ in range(200):
            p = sample_point(cell, rng)
            q = sample_point(cell, rng)
            t = float(rng.uniform())
            mid = mix_trajectories(t, p[0], q[0])
            assert cell.contains((mid,), 1e-7)

    def test_point_path_membership(self):
        at = from_inequalities(LOCATION, [((1.0, 0.0), "<=", 5.0)])
        pc = PathConstraint(at, at, 0.0, True)
        cell = ca._finalize((PATHS,), 0, [], [], [], {}, {0: pc})
        good = Trajectory(0.0, np.tile([2.0, 2.0], (8, 1)))
        moving = Trajectory(0.0, np.vstack([np.tile([2.0, 2.0], (7, 1)), [[3.0, 2.0]]]))
        past = Trajectory(-1.0, np.tile([2.0, 2.0], (8, 1)))
        assert cell.contains((good,))
        assert not cell.contains((moving,))
        assert not cell.contains((past,))


class TestCellConvexity:
    def test_midpoints_stay_inside(self):
        rng = np.random.default_rng(23)
        colour_cell = from_inequalities(
            COLOUR, [(rng.normal(size=3), "<=", 0.8), (rng.normal(size=3), "<=", 0.8)]
        )
        taste_cell = hull(TASTE, BANANA_TASTE)
        cell = product(colour_cell, taste_cell)
        domains = cell.domains
        for _ in range(60):
            p = sample_point(cell, rng)
            q = sample_point(cell, rng)
            mid = mix_points(domains, [0.5, 0.5], [p, q])
            assert cell.contains(mid, 1e-7)


class TestContains:
    def test_yellow_banana_colour_probe(self):
        yellow = from_inequalities(
            COLOUR, [((-1.0, 0, 0), "<=", -0.7), ((0, -1.0, 0), "<=", -0.7), ((0, 0, 1.0), "<=", 0.5)]
        )
        banana_colour = from_inequalities(
            COLOUR,
            [((0.9, -1.0, 0), "<=", 0.0), ((-1.5, 1.0, 0), "<=", 0.0),
             ((-1.0, 0, 0), "<=", -0.3), ((0, 0, 1.0), "<=", 0.1)],
        )
        cell = intersect(yellow, banana_colour)
        assert cell.contains((np.array([0.8, 0.75, 0.05]),))
        assert not cell.contains((np.array([0.8, 0.75, 0.5]),))

    def test_empty_cell_contains_nothing(self):
        x = Box(("x",), ((0.0, 1.0),))
        cell = from_inequalities(x, [((1.0,), "<=", 0.3), ((-1.0,), "<=", -0.7)])
        assert not cell.contains((np.array([0.5]),))

    def test_shape_checked(self):
        cell = full((COLOUR, TASTE))
        with pytest.raises(ShapeMismatch):
            cell.contains((np.zeros(3),))
        with pytest.raises(ShapeMismatch):
            cell.contains((np.zeros(2), np.zeros(4)))
