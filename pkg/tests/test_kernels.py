import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import dense_kernel, gauss_solve, kernel_by_quadrature, random_grid
from splinesvm.errors import DimensionError, DomainError, IllConditionedGram, InvalidParameter, UnsupportedOperator
from splinesvm.kernels import Grid, KernelSpec, gram_matrix, green_kernel, quad_form_inverse, whiten

M1, M2 = KernelSpec(1), KernelSpec(2)


class TestKernelSpecAndGrid:
    @pytest.mark.parametrize("order", [0, 3, -1, True, 1.5])
    def test_unsupported_order(self, order):
        with pytest.raises(UnsupportedOperator):
            KernelSpec(order)

    @pytest.mark.parametrize(
        "points", [[], [0.0, 0.5], [0.5, 0.5], [0.6, 0.4], [0.5, 1.2], [np.nan]]
    )
    def test_invalid_grids(self, points):
        with pytest.raises(InvalidParameter):
            Grid(points)

    def test_grid_is_read_only_and_hashable(self):
        g = Grid([0.25, 0.5])
        with pytest.raises(ValueError):
            g.points[0] = 0.1
        assert g == Grid([0.25, 0.5])
        assert hash(g) == hash(Grid([0.25, 0.5]))
        assert Grid([0.5]).issubset(g)
        assert not Grid([0.75]).issubset(g)


class TestGreenKernel:
    def test_min_kernel_value(self):
        expected = kernel_by_quadrature(1, 0.3, 0.7)
        assert expected == pytest.approx(0.3, abs=1e-12)
        assert green_kernel(M1, 0.3, 0.7) == pytest.approx(0.3, abs=1e-15)

    def test_boundary_is_zero(self):
        assert green_kernel(M1, 0.0, 0.7) == 0.0
        assert green_kernel(M2, 0.0, 0.7) == 0.0

    def test_cubic_kernel_value(self):
        expected = kernel_by_quadrature(2, 0.5, 0.5)
        assert expected == pytest.approx(1.0 / 24.0, abs=1e-14)
        assert green_kernel(M2, 0.5, 0.5) == pytest.approx(1.0 / 24.0, abs=1e-16)

    def test_domain(self):
        with pytest.raises(DomainError):
            green_kernel(M1, -0.1, 0.5)
        with pytest.raises(DomainError):
            green_kernel(M2, 0.5, 1.5)

    @given(st.floats(0, 1), st.floats(0, 1), st.sampled_from([1, 2]))
    def test_symmetry_exact(self, s, t, order):
        spec = KernelSpec(order)
        assert green_kernel(spec, s, t) == green_kernel(spec, t, s)

    @pytest.mark.parametrize("order", [1, 2])
    def test_closed_form_matches_simpson_quadrature(self, rng, order):
        spec = KernelSpec(order)
        s, t = rng.random(1000), rng.random(1000)
        closed = green_kernel(spec, s, t)
        quad = np.array([kernel_by_quadrature(order, a, b, panels=10_000) for a, b in zip(s, t)])
        np.testing.assert_allclose(closed, quad, rtol=0, atol=1e-8)


class TestGramMatrix:
    def test_three_point_min_kernel(self):
        gf = gram_matrix(M1, Grid([0.25, 0.5, 0.75]))
        np.testing.assert_array_equal(
            gf.matrix, [[0.25, 0.25, 0.25], [0.25, 0.5, 0.5], [0.25, 0.5, 0.75]]
        )

    def test_two_point_factor(self):
        gf = gram_matrix(M1, Grid([0.5, 1.0]))
        np.testing.assert_array_equal(gf.matrix, [[0.5, 0.5], [0.5, 1.0]])
        np.testing.assert_allclose(gf.factor @ gf.factor.T, gf.matrix, rtol=1e-15)
        assert np.all(np.triu(gf.factor, 1) == 0)

    def test_near_duplicate_points_raise_with_jitter_hint(self):
        # the Schur pivot equals the spacing; it must fall below 1e-12 * max diag
        grid = Grid([0.5, 0.5 + 1e-13])
        with pytest.raises(IllConditionedGram) as info:
            gram_matrix(M1, grid)
        err = info.value
        assert err.pivot_index == 1
        lam = err.suggested_jitter
        assert lam is not None and np.log10(lam) == pytest.approx(round(np.log10(lam)))
        gram_matrix(M1, grid, lam)
        if lam > 1e-15:
            with pytest.raises(IllConditionedGram):
                gram_matrix(M1, grid, lam / 10)

    def test_negative_jitter_rejected(self):
        with pytest.raises(InvalidParameter):
            gram_matrix(M1, Grid([0.5]), -1e-3)

    @pytest.mark.parametrize("order", [1, 2])
    def test_random_grids_positive_pivots(self, rng, order):
        spec = KernelSpec(order)
        for _ in range(100):
            d = int(rng.integers(1, 21))
            grid = Grid(np.sort(random_grid(rng, d)))
            gf = gram_matrix(spec, grid)
            assert np.all(np.diag(gf.factor) > 0)
            np.testing.assert_allclose(
                gf.factor @ gf.factor.T, gf.matrix, rtol=1e-10, atol=1e-10 * gf.matrix.max()
            )
            np.testing.assert_allclose(gf.matrix, dense_kernel(order, grid.points, grid.points), rtol=1e-14)

    def test_condition_estimate_nonincreasing_in_jitter(self):
        for spec in (M1, M2):
            for grid in (Grid(np.arange(1, 9) / 8), Grid(np.arange(1, 129) / 128)):
                conds = [gram_matrix(spec, grid, lam).condition_estimate for lam in (0, 1e-8, 1e-6, 1e-4, 1e-2, 1.0)]
                assert all(b <= a * (1 + 1e-12) for a, b in zip(conds, conds[1:])), conds


class TestQuadraticForms:
    def test_two_point_inverse_entry(self):
        gf = gram_matrix(M1, Grid([0.5, 1.0]))
        assert quad_form_inverse(gf, [1, 0], [1, 0]) == pytest.approx(4.0, rel=1e-14)
        assert quad_form_inverse(gf, [1, 0], [0, 1]) == pytest.approx(-2.0, rel=1e-14)

    def test_zero_vector(self, rng):
        gf = gram_matrix(M2, Grid([0.25, 0.5, 0.75, 1.0]))
        assert quad_form_inverse(gf, np.zeros(4), rng.normal(size=4)) == 0.0

    def test_three_point_against_gaussian_elimination(self):
        pts = [0.25, 0.5, 0.75]
        gf = gram_matrix(M1, Grid(pts))
        c = gauss_solve(dense_kernel(1, pts, pts), [1.0, 1.0, 1.0])
        assert quad_form_inverse(gf, [1, 1, 1], [1, 1, 1]) == pytest.approx(sum(c), rel=1e-13)
        assert sum(c) == pytest.approx(4.0, rel=1e-13)

    def test_dimension_mismatch(self):
        gf = gram_matrix(M1, Grid([0.5, 1.0]))
        with pytest.raises(DimensionError):
            quad_form_inverse(gf, [1, 0, 0], [1, 0])
        with pytest.raises(DimensionError):
            whiten(gf, [1.0])

    def test_whiten_examples(self):
        gf = gram_matrix(M1, Grid([0.5, 1.0]))
        w = whiten(gf, [1.0, 0.0])
        assert w @ w == pytest.approx(4.0, rel=1e-8)
        np.testing.assert_array_equal(whiten(gf, np.zeros(2)), np.zeros(2))
        inv = np.linalg.inv(gf.matrix)
        e1 = whiten(gf, [1.0, 0.0])
        assert e1 @ e1 == pytest.approx(inv[0, 0], rel=1e-12)

    @pytest.mark.parametrize("order", [1, 2])
    @pytest.mark.parametrize("jitter", [0.0, 1e-6])
    def test_cholesky_and_eigen_paths_agree(self, rng, order, jitter):
        spec = KernelSpec(order)
        for _ in range(50):
            d = int(rng.integers(1, 21))
            gf = gram_matrix(spec, Grid(random_grid(rng, d)), jitter)
            u, v = rng.normal(size=d), rng.normal(size=d)
            q = quad_form_inverse(gf, u, v)
            assert abs(q - whiten(gf, u) @ whiten(gf, v)) <= 1e-8 * (1 + abs(q))
            assert quad_form_inverse(gf, u, u) >= 0
            assert quad_form_inverse(gf, u, v) == pytest.approx(quad_form_inverse(gf, v, u), rel=1e-10, abs=1e-12)

    def test_whiten_rejects_huge_grids(self):
        gf = gram_matrix(M1, Grid(np.arange(1, 2050) / 2049))
        with pytest.raises(InvalidParameter):
            whiten(gf, np.ones(2049))

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.floats(-5, 5), min_size=4, max_size=4))
    def test_quadratic_form_nonnegative(self, values):
        gf = gram_matrix(M2, Grid([0.25, 0.5, 0.75, 1.0]))
        assert quad_form_inverse(gf, values, values) >= 0.0
