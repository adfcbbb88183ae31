"""
Tests for the autodiff engine: closed-form gradients and finite-difference checks.
"""

import numpy as np
import pytest

from nn.autodiff import (
    Tensor,
    concat,
    conv2d,
    elu,
    leaky_relu,
    maxpool2d,
    mse,
    parameter,
    sigmoid,
    square,
    stack,
    tanh,
    upsample2d,
)
from nn.gradcheck import gradient_check
from nn.layers import LSTM, Conv2D, Dense


def projected(out: Tensor, seed: int = 99) -> Tensor:
    """Scalar sum(out * R) with a fixed random R."""
    weights = np.random.default_rng(seed).standard_normal(out.shape)
    return (out * weights).sum()


class TestClosedForm:
    """Gradients against hand-derived expressions."""

    def test_dense_quadratic(self):
        rng = np.random.default_rng(0)
        W = parameter(rng.standard_normal((3, 2)), 'W')
        x = rng.standard_normal((1, 3))
        y = rng.standard_normal((1, 2))

        loss = square(Tensor(x) @ W - y).sum()
        loss.backward()

        expected = 2.0 * x.T @ (x @ W.data - y)
        np.testing.assert_allclose(W.grad, expected, atol=1e-10)

    def test_reused_node(self):
        x = parameter(np.array([1.5, -2.0]), 'x')
        (x * x).sum().backward()
        np.testing.assert_allclose(x.grad, 2 * x.data)

    def test_broadcast_bias_gradient(self):
        b = parameter(np.zeros(3), 'b')
        (Tensor(np.ones((4, 3))) + b).sum().backward()
        np.testing.assert_allclose(b.grad, [4.0, 4.0, 4.0])

    def test_mse_is_batch_mean_of_squared_norms(self):
        pred = Tensor(np.array([[1.0, 2.0], [0.0, 0.0]]))
        target = np.array([[0.0, 0.0], [3.0, 4.0]])
        assert float(mse(pred, target).data) == pytest.approx((5.0 + 25.0) / 2)

    def test_zero_input_conv_has_zero_weight_gradient(self):
        weight = parameter(np.random.default_rng(1).standard_normal((3, 2, 3, 3)), 'W')
        bias = parameter(np.zeros(3), 'b')
        projected(conv2d(Tensor(np.zeros((2, 2, 4, 4))), weight, bias)).backward()
        np.testing.assert_array_equal(weight.grad, 0.0)


class TestFiniteDifferences:
    """Every differentiable operation matches central differences."""

    def test_elementwise_activations(self):
        x = parameter(np.random.default_rng(2).standard_normal((3, 4)), 'x')
        for fn in (sigmoid, tanh, elu, leaky_relu, square):
            result = gradient_check(lambda: projected(fn(x)), [x])
            assert result.passed, fn.__name__

    def test_dense_layer(self):
        rng = np.random.default_rng(3)
        layer = Dense(4, 3, 'elu', 'd', rng)
        x = parameter(rng.standard_normal((5, 4)), 'x')
        result = gradient_check(lambda: projected(layer(x)), layer.parameters() + [x])
        assert result.passed, result.max_rel_error

    def test_conv_layer(self):
        rng = np.random.default_rng(4)
        layer = Conv2D(2, 3, 'linear', 'c', rng)
        layer.b.data = rng.standard_normal(3)
        x = parameter(rng.standard_normal((2, 2, 4, 4)), 'x')
        result = gradient_check(lambda: projected(layer(x)), layer.parameters() + [x])
        assert result.passed, result.max_rel_error

    def test_maxpool(self):
        x = parameter(np.random.default_rng(5).standard_normal((2, 3, 4, 6)), 'x')
        assert gradient_check(lambda: projected(maxpool2d(x)), [x]).passed

    def test_upsample(self):
        x = parameter(np.random.default_rng(6).standard_normal((2, 2, 3, 3)), 'x')
        assert gradient_check(lambda: projected(upsample2d(x)), [x]).passed

    def test_lstm_layer(self):
        rng = np.random.default_rng(7)
        layer = LSTM(2, 3, return_sequences=True, name='l', rng=rng)
        x = parameter(rng.standard_normal((2, 4, 2)), 'x')
        result = gradient_check(lambda: projected(layer(x)), layer.parameters() + [x])
        assert result.passed, result.max_rel_error

    def test_mse_loss(self):
        rng = np.random.default_rng(8)
        pred = parameter(rng.standard_normal((4, 3)), 'pred')
        target = rng.standard_normal((4, 3))
        assert gradient_check(lambda: mse(pred, target), [pred]).passed

    def test_structural_ops(self):
        rng = np.random.default_rng(9)
        a = parameter(rng.standard_normal((2, 3)), 'a')
        b = parameter(rng.standard_normal((2, 3)), 'b')

        def loss():
            joined = concat([a, b], axis=1)
            stacked = stack([a, b[:, ::-1]], axis=0)
            return projected(joined.reshape(3, 4), 1) + projected(stacked, 2) + projected(a[1:, 1:], 3)

        assert gradient_check(loss, [a, b]).passed
