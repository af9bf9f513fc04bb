import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from usets import geometry as geo
from usets.geometry import LpStatus, Verdict

from helpers import random_bounded_polytope
from oracles import extension_exists, grid_project_interval, lp_min_by_vertices

coord = st.floats(min_value=-50, max_value=50, allow_nan=False, allow_infinity=False)


class TestContains:
    def test_triangle_interior(self):
        tri = geo.polytope([[1, 1], [-1, 0], [0, -1]], [1, 0, 0])
        assert geo.contains(tri, [0.5, 0.4])

    def test_tetrahedron_boundary_point(self, tetrahedron):
        # (1,1,0) meets the first face with equality
        assert geo.contains(tetrahedron, [1, 1, 0])

    def test_tetrahedron_outside(self, tetrahedron):
        assert not geo.contains(tetrahedron, [1, 1, 1])

    def test_tolerance(self):
        seg = geo.interval(0, 1)
        assert geo.contains(seg, [1 + 0.5e-9])
        assert not geo.contains(seg, [1 + 1e-6])

    def test_dimension_mismatch(self):
        with pytest.raises(geo.DimensionMismatchError):
            geo.contains(geo.interval(0, 1), [0.0, 0.0])

    def test_ellipsoid(self):
        e = geo.Ellipsoid([0.0, 0.0], np.eye(2), 1.0)
        assert geo.contains(e, [0.9, 0.0])
        assert not geo.contains(e, [1.1, 0.0])

    def test_oracle(self):
        disk = geo.MembershipOracle(lambda p: p @ p <= 1.0, geo.box([-1, -1], [1, 1]))
        assert geo.contains(disk, [0.5, 0.5])
        assert not geo.contains(disk, [0.9, 0.9])


class TestIsEmpty:
    def test_conflicting_halfplanes(self):
        p = geo.polytope([[1.0], [-1.0]], [0.0, -1.0])
        assert geo.is_empty(p) is Verdict.TRUE

    def test_diamond_nonempty(self, diamond_relation):
        assert geo.is_empty(diamond_relation) is Verdict.FALSE

    def test_degenerate_box_point(self):
        assert geo.is_empty(geo.interval(0, 0)) is Verdict.FALSE

    def test_union_all_empty(self):
        p = geo.HPolytope(np.array([[1.0], [-1.0]]), np.array([0.0, -1.0]))
        assert geo.is_empty(geo.UnionOfPolytopes((p, p))) is Verdict.TRUE

    def test_oracle_probably_empty(self):
        never = geo.MembershipOracle(lambda p: False, geo.box([0], [1]))
        assert geo.is_empty(never, seed=1) is Verdict.SAMPLED_TRUE


class TestProject:
    def test_triangle_onto_x(self):
        tri = geo.polytope([[1, 1], [-1, 0], [0, -1]], [1, 0, 0])
        proj = geo.project(tri, [0])
        # independent grid scan over [-1, 2]
        lo, hi = grid_project_interval(tri.a, tri.b, 0, -1.0, 2.0, 1e-3)
        assert geo.regions_equal(proj, geo.interval(0, 1)) is Verdict.TRUE
        assert lo == pytest.approx(0.0, abs=2e-3)
        assert hi == pytest.approx(1.0, abs=2e-3)

    def test_diamond_onto_y(self, diamond_relation):
        proj = geo.project(diamond_relation, [1])
        assert geo.regions_equal(proj, geo.interval(0, 5)) is Verdict.TRUE

    def test_box_coordinate_selection(self):
        b = geo.box([0, 2], [5, 3])
        assert geo.regions_equal(geo.project(b, [1]), geo.interval(2, 3)) is Verdict.TRUE

    def test_keep_out_of_range(self):
        with pytest.raises(IndexError):
            geo.project(geo.box([0, 0], [1, 1]), [2])

    def test_ellipsoid_axis_projection(self):
        q = np.array([[4.0, 1.0], [1.0, 2.0]])
        e = geo.Ellipsoid([1.0, -1.0], q, 2.0)
        proj = geo.project(e, [0])
        assert isinstance(proj, geo.Ellipsoid)
        # the x extent of the ellipsoid is center +/- sqrt(level * Q_00)
        assert geo.linear_max(proj, [1.0]) == pytest.approx(1.0 + math.sqrt(2.0 * 4.0))
        assert -geo.linear_max(proj, [-1.0]) == pytest.approx(1.0 - math.sqrt(2.0 * 4.0))

    def test_projection_soundness_random(self):
        rng = np.random.default_rng(3)
        for trial in range(25):
            dim = int(rng.integers(2, 5))
            poly = random_bounded_polytope(rng, dim, int(rng.integers(1, 9)))
            k = int(rng.integers(1, dim))
            keep = sorted(rng.choice(dim, size=k, replace=False).tolist())
            proj = geo.project(poly, keep)
            for pt in geo.sample_region(poly, 40, seed=trial):
                assert geo.contains(proj, pt[keep])
            for pt in geo.sample_region(proj, 40, seed=trial + 1):
                assert extension_exists(poly.a, poly.b, keep, pt, geo._simplex)

    def test_nested_keep_sets(self):
        rng = np.random.default_rng(4)
        for trial in range(10):
            poly = random_bounded_polytope(rng, 4, 5)
            two_step = geo.project(geo.project(poly, [0, 1, 2]), [0, 1])
            one_step = geo.project(poly, [0, 1])
            assert geo.regions_equal(two_step, one_step) is Verdict.TRUE

    def test_redundancy_removal_preserves_set(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            poly = random_bounded_polytope(rng, 3, 6)
            kept = geo.project(poly, [0, 1, 2])  # permutation path, no FM
            a, b = geo._remove_redundant_rows(np.array(poly.a), np.array(poly.b))
            reduced = geo.HPolytope(a, b)
            assert geo.regions_equal(reduced, kept) is Verdict.TRUE


class TestIntersect:
    def test_intervals(self):
        got = geo.intersect(geo.interval(0, 2), geo.interval(1, 3))
        assert geo.regions_equal(got, geo.interval(1, 2)) is Verdict.TRUE

    def test_disjoint_intervals(self):
        assert isinstance(geo.intersect(geo.interval(0, 2), geo.interval(3, 4)),
                          geo.EmptyRegion)

    def test_tetra_slice_plane_projects_to_segment(self, tetrahedron):
        plane = geo.polytope([[0, 0, 1], [0, 0, -1]], [0, 0])
        cut = geo.intersect(tetrahedron, plane)
        proj = geo.project(cut, [0, 1])
        segment = geo.polytope([[1, 1], [-1, -1], [1, -1], [-1, 1]], [2, 0, 0, 0])
        assert geo.regions_equal(proj, segment) is Verdict.TRUE
        # sampling cross-check on the xy grid
        for x in np.arange(0, 1.001, 1e-2):
            assert geo.contains(proj, [x, x])
        assert not geo.contains(proj, [0.5, 0.6])

    def test_ellipsoid_falls_back_to_oracle(self):
        e = geo.Ellipsoid([0.0, 0.0], np.eye(2), 1.0)
        b = geo.box([0, 0], [2, 2])
        mixed = geo.intersect(e, b)
        assert isinstance(mixed, geo.MembershipOracle)
        assert geo.contains(mixed, [0.5, 0.5])
        assert not geo.contains(mixed, [-0.5, 0.5])
        assert not geo.contains(mixed, [0.9, 0.9])

    @given(lo1=coord, lo2=coord, w1=st.floats(0, 10), w2=st.floats(0, 10))
    @settings(max_examples=60, deadline=None)
    def test_interval_intersection_matches_interval_arithmetic(self, lo1, lo2, w1, w2):
        i1, i2 = geo.interval(lo1, lo1 + w1), geo.interval(lo2, lo2 + w2)
        got = geo.intersect(i1, i2)
        lo, hi = max(lo1, lo2), min(lo1 + w1, lo2 + w2)
        if lo > hi + geo.EPS_FEAS:
            assert isinstance(got, geo.EmptyRegion)
        else:
            assert geo.contains(got, [max(lo, min(hi, (lo + hi) / 2))])


class TestProduct:
    def test_box_product(self):
        got = geo.product(geo.interval(0, 1), geo.interval(2, 3))
        assert isinstance(got, geo.Box)
        assert geo.regions_equal(got, geo.box([0, 2], [1, 3])) is Verdict.TRUE

    def test_empty_product(self):
        got = geo.product(geo.EmptyRegion(1), geo.interval(0, 1))
        assert isinstance(got, geo.EmptyRegion) and got.dim == 2

    def test_square_times_interval_is_cube(self, unit_square):
        cube = geo.product(geo.as_polytope(unit_square), geo.as_polytope(geo.interval(0, 1)))
        assert cube.nrows == 6
        rng = np.random.default_rng(0)
        pts = rng.uniform(-0.2, 1.2, size=(1000, 3))
        for p in pts:
            inside = bool(np.all((p >= 0) & (p <= 1)))
            assert geo.contains(cube, p) == inside


class TestSlice:
    def test_diamond_at_one(self, diamond_relation):
        got = geo.slice_region(diamond_relation, {0: 1.0})
        assert geo.regions_equal(got, geo.interval(1.5, 3.5)) is Verdict.TRUE

    def test_diamond_outside_domain(self, diamond_relation):
        assert isinstance(geo.slice_region(diamond_relation, {0: 6.0}), geo.EmptyRegion)

    def test_unit_square(self, unit_square):
        got = geo.slice_region(unit_square, {0: 0.3})
        assert geo.regions_equal(got, geo.interval(0, 1)) is Verdict.TRUE

    def test_slice_equals_intersect_then_project(self):
        rng = np.random.default_rng(6)
        for trial in range(10):
            poly = random_bounded_polytope(rng, 3, 5)
            x0 = geo.sample_region(poly, 1, seed=trial)[0]
            sliced = geo.slice_region(poly, {1: x0[1]})
            plane = geo.polytope([[0, 1, 0], [0, -1, 0]], [x0[1], -x0[1]])
            via_project = geo.project(geo.intersect(poly, plane), [0, 2])
            assert geo.regions_equal(sliced, via_project) is Verdict.TRUE

    def test_ellipsoid_slice(self):
        e = geo.Ellipsoid([0.0, 0.0], np.eye(2), 1.0)
        cut = geo.slice_region(e, {0: 0.6})
        assert isinstance(cut, geo.Ellipsoid)
        half = math.sqrt(1 - 0.36)
        assert geo.linear_max(cut, [1.0]) == pytest.approx(half, abs=1e-9)
        assert isinstance(geo.slice_region(e, {0: 1.5}), geo.EmptyRegion)


class TestLinearMax:
    def test_unit_square(self, unit_square):
        assert geo.linear_max(unit_square, [1, 0]) == pytest.approx(1.0)

    def test_tetrahedron_tight_face(self, tetrahedron):
        assert geo.linear_max(tetrahedron, [1, 1, 1]) == pytest.approx(2.0, abs=1e-9)

    def test_unbounded_ray(self):
        assert geo.linear_max(geo.polytope([[-1.0]], [0.0]), [1.0]) == math.inf

    def test_empty(self):
        assert geo.linear_max(geo.EmptyRegion(1), [1.0]) == -math.inf

    def test_union_is_max_over_pieces(self):
        rng = np.random.default_rng(7)
        p1 = random_bounded_polytope(rng, 2, 3)
        p2 = random_bounded_polytope(rng, 2, 3)
        u = geo.UnionOfPolytopes((p1, p2))
        for _ in range(10):
            c = rng.normal(size=2)
            assert geo.linear_max(u, c) == pytest.approx(
                max(geo.linear_max(p1, c), geo.linear_max(p2, c)))

    def test_oracle_unsupported(self):
        disk = geo.MembershipOracle(lambda p: True, geo.box([0], [1]))
        with pytest.raises(geo.UnsupportedRepresentationError):
            geo.linear_max(disk, [1.0])


class TestIsSubset:
    def test_intervals(self):
        assert geo.is_subset(geo.interval(1, 2), geo.interval(0, 3)) is Verdict.TRUE

    def test_tetra_in_cube(self, tetrahedron):
        cube = geo.box([0, 0, 0], [1, 1, 1])
        # all four defining vertices are cube corners, and both sets are convex
        for v in [(0, 0, 0), (1, 1, 0), (1, 0, 1), (0, 1, 1)]:
            assert geo.contains(cube, v) and geo.contains(tetrahedron, v)
        assert geo.is_subset(tetrahedron, cube) is Verdict.TRUE

    def test_cube_not_in_tetra(self, tetrahedron):
        cube = geo.box([0, 0, 0], [1, 1, 1])
        assert geo.is_subset(cube, tetrahedron) is Verdict.FALSE

    def test_sampled_path_union_superset(self):
        piece1 = geo.as_polytope(geo.interval(0, 1))
        piece2 = geo.as_polytope(geo.interval(2, 3))
        union = geo.UnionOfPolytopes((piece1, piece2))
        inner = geo.interval(0.2, 0.8)
        assert geo.is_subset(inner, union, seed=0) is Verdict.SAMPLED_TRUE
        assert geo.is_subset(geo.interval(0.5, 2.5), union, seed=0) is Verdict.FALSE


class TestRegionsEqual:
    def test_same_set_two_representations(self):
        assert geo.regions_equal(
            geo.interval(0, 1), geo.polytope([[-1.0], [1.0]], [0.0, 1.0])) is Verdict.TRUE

    def test_projection_vs_interval(self):
        tri = geo.polytope([[1, 1], [-1, 0], [0, -1]], [1, 0, 0])
        assert geo.regions_equal(geo.project(tri, [0]), geo.interval(0, 1)) is Verdict.TRUE

    def test_tolerance_boundary(self):
        assert geo.regions_equal(geo.interval(0, 1), geo.interval(0, 1 + 1e-6)) is Verdict.FALSE


class TestSolveLp:
    def test_square_min(self, unit_square):
        res = geo.solve_lp(geo.LpProblem(np.array([-1.0, -1.0]), geo.as_polytope(unit_square)))
        assert res.status is LpStatus.OPTIMAL
        assert res.value == pytest.approx(-2.0)
        assert np.allclose(res.x, [1.0, 1.0])

    def test_infeasible(self):
        p = geo.polytope([[1.0], [-1.0]], [0.0, -1.0])
        assert geo.solve_lp(geo.LpProblem(np.array([1.0]), p)).status is LpStatus.INFEASIBLE

    def test_tetra_face_optimum(self, tetrahedron):
        res = geo.solve_lp(geo.LpProblem(np.array([-1.0, -1.0, -1.0]), tetrahedron))
        assert res.status is LpStatus.OPTIMAL
        oracle = lp_min_by_vertices([-1, -1, -1], tetrahedron.a, tetrahedron.b)
        assert res.value == pytest.approx(oracle, abs=1e-9)
        assert res.x @ np.ones(3) == pytest.approx(2.0, abs=1e-9)

    def test_no_constraints(self):
        p = geo.HPolytope(np.zeros((0, 2)), np.zeros(0))
        assert geo.solve_lp(geo.LpProblem(np.zeros(2), p)).status is LpStatus.OPTIMAL
        assert geo.solve_lp(geo.LpProblem(np.array([1.0, 0.0]), p)).status is LpStatus.UNBOUNDED

    def test_matches_vertex_oracle_random(self):
        rng = np.random.default_rng(11)
        for trial in range(60):
            poly = random_bounded_polytope(rng, 3, int(rng.integers(1, 8)))
            c = rng.normal(size=3)
            res = geo.solve_lp(geo.LpProblem(c, poly))
            assert res.status is LpStatus.OPTIMAL
            assert res.value == pytest.approx(
                lp_min_by_vertices(c, poly.a, poly.b), abs=1e-8)


class TestSampling:
    def test_hit_and_run_stays_inside(self):
        rng = np.random.default_rng(12)
        poly = random_bounded_polytope(rng, 3, 4)
        for p in geo.sample_region(poly, 200, seed=0):
            assert geo.contains(poly, p)

    def test_deterministic_for_seed(self):
        poly = random_bounded_polytope(np.random.default_rng(1), 2, 3)
        a = geo.sample_region(poly, 10, seed=42)
        b = geo.sample_region(poly, 10, seed=42)
        assert np.array_equal(a, b)

    def test_chebyshev_center_square(self, unit_square):
        center, radius = geo.chebyshev_center(geo.as_polytope(unit_square))
        assert radius == pytest.approx(0.5)
        assert np.allclose(center, [0.5, 0.5])


class TestVerdict:
    @given(st.sampled_from(list(Verdict)), st.sampled_from(list(Verdict)))
    def test_conjunction_commutes(self, a, b):
        assert a.both(b) is b.both(a)

    @given(st.sampled_from(list(Verdict)))
    def test_false_dominates(self, a):
        assert a.both(Verdict.FALSE) is Verdict.FALSE

    @given(st.sampled_from(list(Verdict)))
    def test_true_is_identity(self, a):
        assert a.both(Verdict.TRUE) is a

    def test_flags(self):
        assert Verdict.TRUE.holds and Verdict.TRUE.exact
        assert Verdict.SAMPLED_TRUE.holds and not Verdict.SAMPLED_TRUE.exact
        assert not Verdict.FALSE.holds and Verdict.FALSE.exact


class TestInvariants:
    def test_hpolytope_rejects_contradictory_zero_row(self):
        with pytest.raises(ValueError):
            geo.HPolytope(np.zeros((1, 2)), np.array([-1.0]))

    def test_box_rejects_inverted(self):
        with pytest.raises(ValueError):
            geo.box([1.0], [0.0])

    def test_ellipsoid_rejects_indefinite(self):
        with pytest.raises(ValueError):
            geo.Ellipsoid([0.0], np.array([[-1.0]]), 1.0)

    def test_regions_are_frozen(self):
        b = geo.box([0], [1])
        with pytest.raises(Exception):
            b.lower = np.array([5.0])
        with pytest.raises(ValueError):
            b.lower[0] = 5.0  # read-only array
