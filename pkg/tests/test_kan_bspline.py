import numpy as np
import pytest
from scipy.interpolate import BSpline as ScipyBSpline

from pacbm.kan.bspline import BSplineGrid, bspline_basis, bspline_basis_and_derivative


class TestGridConstruction:
    def test_knot_count_and_basis_count(self):
        g = BSplineGrid(order=3, size=7)
        assert g.knots.size == 7 + 2 * 3 + 1
        assert g.n_basis == 10
        assert np.all(np.diff(g.knots) > 0)

    def test_interior_knots_cover_range(self):
        g = BSplineGrid(order=3, size=7, lo=-1.0, hi=1.0)
        assert g.knots[3] == -1.0
        assert g.knots[3 + 7] == 1.0

    def test_invalid_params(self):
        with pytest.raises(ValueError):
            BSplineGrid(order=0)
        with pytest.raises(ValueError):
            BSplineGrid(size=0)
        with pytest.raises(ValueError):
            BSplineGrid(lo=1.0, hi=1.0)


class TestBasisValues:
    def test_partition_of_unity(self):
        g = BSplineGrid(order=3, size=7)
        x = np.linspace(-1.0, 1.0, 1001)
        assert np.allclose(bspline_basis(x, g).sum(axis=-1), 1.0, atol=1e-12)

    def test_partition_of_unity_other_orders(self):
        for order in (1, 2, 3, 4):
            g = BSplineGrid(order=order, size=5, lo=0.0, hi=2.0)
            x = np.linspace(0.0, 2.0, 501)
            assert np.allclose(bspline_basis(x, g).sum(axis=-1), 1.0, atol=1e-12)

    def test_non_negative(self):
        g = BSplineGrid(order=3, size=7)
        b = bspline_basis(np.linspace(-1, 1, 500), g)
        assert b.min() >= 0.0

    def test_local_support_at_left_boundary(self):
        g = BSplineGrid(order=3, size=7)
        b = bspline_basis(np.array([-1.0]), g)[0]
        assert np.all(b[g.order + 1:] == 0.0)  # only the leftmost k+1 can be nonzero
        assert b[:g.order + 1].sum() == pytest.approx(1.0)

    def test_clamping_outside_range(self):
        g = BSplineGrid(order=3, size=7)
        lo_val = bspline_basis(np.array([-5.0]), g)
        hi_val = bspline_basis(np.array([7.0]), g)
        assert np.array_equal(lo_val, bspline_basis(np.array([-1.0]), g))
        assert np.array_equal(hi_val, bspline_basis(np.array([1.0]), g))

    def test_linear_hat_hand_values(self):
        # order 1, two intervals on [0, 1]: hats centered at 0, 0.5, 1.
        # At x = 0.25 the first two hats are halfway down/up: (0.5, 0.5, 0).
        g = BSplineGrid(order=1, size=2, lo=0.0, hi=1.0)
        b = bspline_basis(np.array([0.25]), g)[0]
        assert np.allclose(b, [0.5, 0.5, 0.0])

    def test_matches_scipy(self):
        g = BSplineGrid(order=3, size=7)
        x = np.linspace(-1.0, 1.0, 257)
        b = bspline_basis(x, g)
        for i in range(g.n_basis):
            coeff = np.zeros(g.n_basis)
            coeff[i] = 1.0
            ref = ScipyBSpline(g.knots, coeff, g.order)(x)
            assert np.allclose(b[:, i], ref, atol=1e-12)


class TestBasisDerivative:
    def test_matches_scipy_derivative(self):
        g = BSplineGrid(order=3, size=7)
        x = np.linspace(-0.999, 0.999, 101)
        _, db = bspline_basis_and_derivative(x, g)
        for i in range(g.n_basis):
            coeff = np.zeros(g.n_basis)
            coeff[i] = 1.0
            ref = ScipyBSpline(g.knots, coeff, g.order).derivative()(x)
            assert np.allclose(db[:, i], ref, atol=1e-10)

    def test_derivative_sums_to_zero_inside_range(self):
        # derivative of the unity partition
        g = BSplineGrid(order=3, size=7)
        x = np.linspace(-1.0, 1.0, 401)
        _, db = bspline_basis_and_derivative(x, g)
        assert np.max(np.abs(db.sum(axis=-1))) < 1e-9

    def test_value_part_matches_plain_basis(self):
        g = BSplineGrid(order=2, size=5)
        x = np.linspace(-1, 1, 57)
        b, _ = bspline_basis_and_derivative(x, g)
        assert np.array_equal(b, bspline_basis(x, g))

    def test_finite_difference_agreement(self):
        g = BSplineGrid(order=3, size=7)
        x = np.linspace(-0.95, 0.95, 41)
        h = 1e-6
        _, db = bspline_basis_and_derivative(x, g)
        fd = (bspline_basis(x + h, g) - bspline_basis(x - h, g)) / (2 * h)
        assert np.allclose(db, fd, atol=1e-6)
