"""
Tests for the covariance kernels.
"""

import math

import numpy as np
import pytest

from gpr.kernels import kernel_matern, kernel_matern15, kernel_product, kernel_rbf


class TestRbf:
    """Tests for the squared-exponential kernel."""

    def test_zero_distance_gives_variance(self):
        assert kernel_rbf([1.0, 2.0], [1.0, 2.0], 0.7, 2.5)[0, 0] == pytest.approx(2.5)

    def test_literal_length_scale(self):
        # |x - y|^2 = 1 = 2l
        assert kernel_rbf([0.0], [1.0], 0.5, 1.0)[0, 0] == pytest.approx(math.exp(-1), abs=1e-12)

    def test_squared_length_scale_flag(self):
        value = kernel_rbf([0.0], [2.0], 2.0, 1.0, squared_length_scale=True)[0, 0]
        assert value == pytest.approx(math.exp(-0.5), abs=1e-12)

    def test_symmetric(self):
        rng = np.random.default_rng(0)
        x, y = rng.standard_normal((2, 3))
        assert kernel_rbf(x, y, 1.3, 0.8)[0, 0] == kernel_rbf(y, x, 1.3, 0.8)[0, 0]

    def test_rejects_non_positive_length_scale(self):
        with pytest.raises(ValueError):
            kernel_rbf([0.0], [1.0], 0.0)


class TestMatern:
    """Tests for the Matérn kernels."""

    def test_zero_distance(self):
        assert kernel_matern15([0.0, 0.0], [0.0, 0.0], 1.0, 3.0)[0, 0] == pytest.approx(3.0)
        assert kernel_matern([0.0], [0.0], 1.0, 3.0)[0, 0] == pytest.approx(3.0)

    def test_closed_form_value(self):
        length = 2.0
        value = kernel_matern15([0.0], [length / math.sqrt(3.0)], length, 1.0)[0, 0]
        assert value == pytest.approx(2 * math.exp(-1), abs=1e-12)

    def test_decays_to_zero(self):
        assert kernel_matern15([0.0], [1e3], 1.0)[0, 0] == pytest.approx(0.0, abs=1e-12)

    def test_closed_form_matches_bessel(self):
        length = 1.7
        ratios = np.arange(0.1, 5.0 + 1e-9, 0.1)
        points = (ratios * length)[:, None]
        origin = np.zeros((1, 1))

        closed = kernel_matern15(origin, points, length, 1.4)
        general = kernel_matern(origin, points, length, 1.4, nu=1.5)

        np.testing.assert_allclose(closed, general, rtol=0, atol=1e-10)


class TestProduct:
    """Tests for the product kernel."""

    def test_zero_distance(self):
        assert kernel_product([1.0], [1.0], 1.0, 2.0, 1.0, 3.0)[0, 0] == pytest.approx(6.0)

    def test_equals_product_of_parts(self):
        rng = np.random.default_rng(1)
        x, y = rng.standard_normal((2, 4))
        expected = kernel_rbf(x, y, 0.9, 1.1)[0, 0] * kernel_matern15(x, y, 1.6, 0.7)[0, 0]
        value = kernel_product(x, y, 0.9, 1.1, 1.6, 0.7)[0, 0]
        assert abs(value - expected) <= 1e-15
        assert value <= 1.1 * 0.7


class TestGram:
    """Gram matrices are symmetric positive semi-definite."""

    @pytest.mark.parametrize('kernel', [
        lambda a, b: kernel_rbf(a, b, 0.5, 1.0),
        lambda a, b: kernel_matern15(a, b, 0.5, 1.0),
        lambda a, b: kernel_product(a, b, 0.5, 1.0, 0.8, 1.0),
    ])
    def test_psd(self, kernel):
        X = np.random.default_rng(2).standard_normal((30, 4))
        K = kernel(X, X)
        np.testing.assert_allclose(K, K.T, atol=1e-15)
        assert np.linalg.eigvalsh(K).min() >= -1e-10
