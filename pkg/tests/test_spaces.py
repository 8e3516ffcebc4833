import numpy as np
import pytest

from hotype import spaces as sp
from hotype.errors import (
    BudgetExceededError,
    DuplicatePointError,
    KindMismatchError,
)


def grid_index(space, x):
    return int(np.argmin(np.abs(space.points.ravel() - x)))


class TestGridBuilder:
    def test_interval_partition(self):
        s = sp.build_grid_space(1, 1.0, 5)
        assert s.n_points == 5
        assert np.allclose(s.weights, 0.4)
        assert s.total_measure == pytest.approx(2.0)

    def test_square_measure(self):
        s = sp.build_grid_space(2, 1.0, 4)
        assert s.n_points == 16
        assert s.total_measure == pytest.approx(4.0)

    def test_fine_grid_ball_measure(self):
        s = sp.build_grid_space(1, 1.0, 1001)
        b = sp.ball(s, grid_index(s, 0.0), 0.5)
        assert abs(b.measure - 1.0) < 0.01

    def test_budget(self):
        with pytest.raises(BudgetExceededError):
            sp.build_grid_space(3, 1.0, 40)

    def test_bad_args(self):
        with pytest.raises(ValueError):
            sp.build_grid_space(1, 1.0, 2)
        with pytest.raises(ValueError):
            sp.build_grid_space(0, 1.0, 5)
        with pytest.raises(ValueError):
            sp.build_grid_space(1, -1.0, 5)


class TestHeisenberg:
    def test_gamma_and_cardinality(self):
        s = sp.build_heisenberg_space(1, 1.0, 9)
        assert s.constants.gamma == 4.0
        assert s.n_points == 729

    def test_group_identity_and_inverse(self):
        g = sp.Point(sp.HEISENBERG, [0.3, -0.5, 0.9], 1)
        e = sp.Point(sp.HEISENBERG, [0.0, 0.0, 0.0], 1)
        assert np.allclose(sp.heisenberg_mul(e, g).coords, g.coords)
        prod = sp.heisenberg_mul(g, sp.heisenberg_inverse(g))
        assert np.allclose(prod.coords, 0.0)

    def test_hand_product(self):
        a = sp.Point(sp.HEISENBERG, [1.0, 0.0, 0.0], 1)
        b = sp.Point(sp.HEISENBERG, [0.0, 1.0, 0.0], 1)
        assert np.allclose(sp.heisenberg_mul(a, b).coords, [1.0, 1.0, -2.0])

    def test_norm_values(self):
        z = sp.Point(sp.HEISENBERG, [0.0, 0.0, 0.0], 1)
        e1 = sp.Point(sp.HEISENBERG, [1.0, 0.0, 0.0], 1)
        assert sp.heisenberg_norm(z) == 0.0
        assert sp.heisenberg_norm(e1) == 1.0

    def test_dilation_homogeneity(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            g = sp.Point(sp.HEISENBERG, rng.uniform(-1, 1, 3), 1)
            lhs = sp.heisenberg_norm(sp.heisenberg_dilate(2.0, g))
            assert lhs == pytest.approx(2.0 * sp.heisenberg_norm(g), rel=1e-12)

    def test_kind_mismatch(self):
        a = sp.Point(sp.HEISENBERG, [1.0, 0.0, 0.0], 1)
        b = sp.Point(sp.EUCLIDEAN, [1.0, 0.0])
        with pytest.raises(KindMismatchError):
            sp.heisenberg_mul(a, b)

    def test_lattice_growth_exponent(self):
        # log-log fit of mu(B(0,r)) over r in [0.2, 0.8]
        s = sp.build_heisenberg_space(1, 1.0, 41, budget=80_000)
        origin = int(np.argmin(np.sum(s.points ** 2, axis=1)))
        radii = np.geomspace(0.2, 0.8, 10)
        mus = sp._measure_profile(s, origin, radii)
        slope = sp._loglog_slope(radii, mus)
        assert abs(slope - 4.0) <= 0.15 * 4.0


class TestSphere:
    def test_total_measure_exact(self):
        s = sp.build_sphere_space(2, 4000, 7)
        assert s.total_measure == 1.0

    def test_self_distance_zero(self):
        s = sp.build_sphere_space(2, 500, 7)
        for i in range(0, 500, 37):
            assert sp.quasi_distance(s, i, i) == 0.0

    def test_unit_norm_invariant(self):
        s = sp.build_sphere_space(2, 300, 3)
        assert np.max(np.abs(np.sum(s.points ** 2, axis=1) - 1.0)) <= 1e-12

    def test_growth_exponent(self):
        s = sp.build_sphere_space(2, 4000, 7)
        rep = sp.doubling_report(s, 200, seed=3)
        assert abs(rep.gamma_fit - 4.0) <= 0.15 * 4.0

    def test_seed_determinism(self):
        a = sp.build_sphere_space(2, 200, 9)
        b = sp.build_sphere_space(2, 200, 9)
        assert np.array_equal(a.points, b.points)


class TestQuasiDistance:
    def test_zero_iff_same(self):
        s = sp.build_grid_space(1, 1.0, 5)
        assert sp.quasi_distance(s, 2, 2) == 0.0
        assert sp.quasi_distance(s, grid_index(s, 0.0), grid_index(s, 0.4)) \
            == pytest.approx(0.4)

    def test_symmetry_exact(self):
        s = sp.build_sphere_space(2, 300, 1)
        rng = np.random.default_rng(0)
        for _ in range(1000):
            i, j = rng.integers(0, 300, 2)
            assert sp.quasi_distance(s, int(i), int(j)) \
                == sp.quasi_distance(s, int(j), int(i))

    def test_index_errors(self):
        s = sp.build_grid_space(1, 1.0, 5)
        with pytest.raises(IndexError):
            sp.quasi_distance(s, 0, 5)


class TestBalls:
    def test_all_points_at_large_radius(self):
        s = sp.build_grid_space(2, 1.0, 7)
        b = sp.ball(s, 0, 10 * s.diameter)
        assert len(b.member_indices) == s.n_points
        assert b.measure == pytest.approx(s.total_measure)

    def test_singleton_below_min_sep(self):
        s = sp.build_grid_space(1, 1.0, 21)
        b = sp.ball(s, 10, 0.5 * s.min_sep)
        assert list(b.member_indices) == [10]
        assert b.measure == pytest.approx(float(s.weights[10]))

    def test_monotone_in_radius(self):
        s = sp.build_sphere_space(2, 400, 5)
        rng = np.random.default_rng(2)
        for _ in range(50):
            i = int(rng.integers(0, 400))
            r1, r2 = sorted(rng.uniform(0.05, 1.2, 2))
            b1 = sp.ball(s, i, r1)
            b2 = sp.ball(s, i, r2)
            assert set(b1.member_indices) <= set(b2.member_indices)

    def test_center_always_member(self):
        s = sp.build_heisenberg_space(1, 1.0, 5)
        b = sp.ball(s, 17, 1e-9)
        assert 17 in b.member_indices


class TestEngulfing:
    def test_sampled_engulfing(self):
        for s in [sp.build_grid_space(1, 1.0, 201),
                  sp.build_sphere_space(2, 500, 3)]:
            rep = sp.engulfing_check(s, sample_count=100, seed=1)
            assert rep["pass"], rep


class TestVitali:
    def test_single_ball(self):
        s = sp.build_grid_space(1, 4.0, 201)
        b = sp.ball(s, 100, 1.0)
        cov = sp.vitali_cover(s, [b])
        assert len(cov) == 1 and cov.covered

    def test_identical_balls_tiebreak(self):
        s = sp.build_grid_space(1, 4.0, 201)
        b = sp.ball(s, 100, 1.0)
        cov = sp.vitali_cover(s, [b, sp.ball(s, 100, 1.0)])
        assert len(cov) == 1

    def test_hand_trace(self):
        s = sp.build_grid_space(1, 4.0, 801)
        balls = [sp.ball(s, grid_index(s, 0.0), 1.0),
                 sp.ball(s, grid_index(s, 0.1), 0.5),
                 sp.ball(s, grid_index(s, 3.0), 1.0)]
        cov = sp.vitali_cover(s, balls)
        centers = sorted(float(b.center.coords[0]) for b in cov)
        assert len(cov) == 2
        assert centers == pytest.approx([0.0, 3.0], abs=0.01)
        assert cov.covered

    def test_disjoint_and_covering(self):
        s = sp.build_sphere_space(2, 600, 4)
        rng = np.random.default_rng(8)
        balls = [sp.ball(s, int(rng.integers(0, 600)),
                         float(rng.uniform(0.2, 0.6))) for _ in range(25)]
        cov = sp.vitali_cover(s, balls)
        assert cov.covered
        for a in range(len(cov)):
            for b in range(a + 1, len(cov)):
                assert not sp._balls_intersect(cov[a], cov[b])


class TestDoubling:
    def test_grid_doubling_constant(self):
        s = sp.build_grid_space(1, 1.0, 2001)
        rep = sp.doubling_report(s, 200, seed=3)
        assert abs(rep.doubling_estimate - 2.0) <= 0.15 * 2.0

    def test_grid_gamma(self):
        s = sp.build_grid_space(2, 1.0, 45)
        rep = sp.doubling_report(s, 200, seed=3)
        assert abs(rep.gamma_fit - 2.0) <= 0.15 * 2.0

    def test_euclidean_beta(self):
        s = sp.build_grid_space(1, 1.0, 501)
        rep = sp.doubling_report(s, 100, seed=3)
        assert rep.beta_estimate >= 0.9

    def test_lower_growth_positive(self):
        s = sp.build_grid_space(1, 1.0, 501)
        rep = sp.doubling_report(s, 100, seed=3)
        assert rep.growth_eps > 0

    def test_sample_count_validation(self):
        s = sp.build_grid_space(1, 1.0, 101)
        with pytest.raises(ValueError):
            sp.doubling_report(s, 10)


class TestNormalizeMetric:
    def test_grid_linear_measure(self):
        g = sp.build_grid_space(1, 1.0, 1001)
        ng = sp.normalize_metric(g, 1.0)
        i0 = grid_index(ng, 0.0)
        for r in [0.1, 0.2, 0.4, 0.8]:
            assert abs(sp.ball_measure(ng, i0, r) - r) <= 0.1 * r

    def test_grid_2d_comparable_to_euclidean(self):
        g = sp.build_grid_space(2, 1.0, 31)
        ng = sp.normalize_metric(g, 2.0)
        rng = np.random.default_rng(4)
        ratios = []
        for _ in range(200):
            i, j = rng.integers(0, ng.n_points, 2)
            if i == j:
                continue
            de = float(np.linalg.norm(ng.points[i] - ng.points[j]))
            dn = sp.quasi_distance(ng, int(i), int(j))
            if de > 4 * g.min_sep:
                ratios.append(dn / de)
        spread = max(ratios) / min(ratios)
        assert spread <= 4.0

    def test_tail_bound_constant(self):
        g = sp.build_grid_space(1, 1.0, 1001)
        ng = sp.normalize_metric(g, 1.0)
        centers = sp.sample_centers(ng, 12, seed=2)
        rep = sp.tail_measure_bound(ng, 0.2, 2.0, centers)
        assert rep["constant"] <= 10.0

    def test_tail_bound_other_exponents(self):
        g = sp.build_grid_space(1, 1.0, 501)
        ng = sp.normalize_metric(g, 1.0)
        centers = sp.sample_centers(ng, 8, seed=2)
        for s in [1.5, 3.0]:
            rep = sp.tail_measure_bound(ng, 0.2, s, centers)
            assert np.isfinite(rep["constant"])

    def test_quasi_triangle_on_normalized(self):
        g = sp.build_grid_space(1, 1.0, 301)
        ng = sp.normalize_metric(g, 1.0)
        rng = np.random.default_rng(9)
        worst = 0.0
        for _ in range(10_000):
            i, j, k = rng.integers(0, ng.n_points, 3)
            if i == k or (i == j or j == k):
                continue
            d_ik = sp.quasi_distance(ng, int(i), int(k))
            d_sum = (sp.quasi_distance(ng, int(i), int(j))
                     + sp.quasi_distance(ng, int(j), int(k)))
            worst = max(worst, d_ik / d_sum)
        cst = ng.constants
        assert worst <= 2.0 * cst.c * cst.doubling

    def test_duplicate_points_rejected(self):
        pts = np.array([[0.0], [0.0], [1.0]])
        w = np.ones(3)
        s = sp.DiscreteSpace(sp.EUCLIDEAN, pts, w, sp.Metric(sp.EUCLIDEAN),
                             sp.Constants(2.0, 2.0, 1.0, 1.0),
                             diameter=1.0, min_sep=0.5)
        with pytest.raises(DuplicatePointError):
            sp.normalize_metric(s, 1.0)


class TestSerialization:
    @pytest.mark.parametrize("build", [
        lambda: sp.build_grid_space(2, 1.0, 9),
        lambda: sp.build_heisenberg_space(1, 1.0, 7),
        lambda: sp.build_sphere_space(2, 200, 11),
        lambda: sp.normalize_metric(sp.build_grid_space(1, 1.0, 101), 1.0),
    ])
    def test_roundtrip_byte_identical(self, build, tmp_path):
        s = build()
        path = tmp_path / "space.txt"
        sp.save_space(s, path)
        s2 = sp.load_space(path)
        assert sp.space_to_text(s2) == sp.space_to_text(s)
        assert np.array_equal(s.points, s2.points)
        i, j = 3, min(50, s.n_points - 1)
        assert sp.quasi_distance(s, i, j) == sp.quasi_distance(s2, i, j)

    def test_bad_header(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("NOT-A-SPACE v9\n")
        with pytest.raises(sp.FormatError):
            sp.load_space(path)
