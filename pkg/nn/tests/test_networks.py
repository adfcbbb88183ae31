"""
Tests for network builders, sliding windows and scaling.
"""

import numpy as np
import pytest

from nn.layers import NetworkConfigError
from nn.networks import build_cae, build_ffnn, build_lstm, image_side
from nn.scaling import FeatureScaler
from nn.windows import build_sliding_windows, merge_windows


class TestAutoencoder:
    """Tests for the convolutional autoencoder layout."""

    def test_reference_layout_shapes(self):
        cae = build_cae(256, latent_dim=4, seed=0)
        x = np.random.default_rng(0).standard_normal((2, 256))

        z = cae.encode(x)
        out = cae.decode(z)

        assert cae.side == 16
        assert z.shape == (2, 4)
        assert out.shape == (2, 256)
        assert cae.encoder.layers[0].in_channels == 1
        assert cae.encoder.layers[-1].out_features == 4
        assert cae.decoder.layers[-1].out_channels == 1

    def test_configurable_latent(self):
        cae = build_cae(64, latent_dim=5)
        assert cae.encode(np.zeros((1, 64))).shape == (1, 5)

    @pytest.mark.parametrize('rank', [250, 144, 0])
    def test_rejects_unusable_rank(self, rank):
        with pytest.raises(NetworkConfigError):
            build_cae(rank)

    def test_image_side(self):
        assert image_side(256) == 16
        assert image_side(64) == 8

    def test_same_seed_same_weights(self):
        a = build_cae(64, seed=3)
        b = build_cae(64, seed=3)
        for pa, pb in zip(a.parameters(), b.parameters()):
            np.testing.assert_array_equal(pa.data, pb.data)


class TestFfnn:
    """Tests for the first-window regressor."""

    def test_widths(self):
        net = build_ffnn(4, latent_dim=4)
        assert net.layers[0].in_features == 5
        assert net.layers[0].out_features == 50
        assert net.layers[-1].out_features == 4
        assert net.predict(np.zeros((3, 5))).shape == (3, 4)


class TestLstm:
    """Tests for the latent-dynamics LSTM."""

    def test_layout(self):
        net = build_lstm(4, 4, window=10)
        recurrent = net.layers[:3]
        assert [layer.units for layer in recurrent] == [50, 50, 50]
        assert recurrent[0].in_features == 8
        assert [layer.return_sequences for layer in recurrent] == [True, True, False]
        assert net.predict(np.zeros((2, 10, 8))).shape == (2, 4)

    def test_zero_weights_zero_input(self):
        net = build_lstm(3, 2, window=4)
        for p in net.parameters():
            p.data = np.zeros_like(p.data)
        np.testing.assert_array_equal(net.predict(np.zeros((2, 4, 5))), 0.0)


class TestSlidingWindows:
    """Tests for the windowing contract."""

    def test_boundary(self):
        data = build_sliding_windows(np.zeros((11, 4)), np.zeros(4), window=10)
        assert len(data) == 1

    def test_sample_count(self):
        data = build_sliding_windows(np.zeros((200, 4)), np.ones(4), window=10)
        assert len(data) == 190
        assert data.inputs.shape == (190, 10, 8)
        assert data.targets.shape == (190, 4)

    def test_indexing(self):
        latents = np.arange(20, dtype=float)[:, None] * np.ones((1, 2))
        theta = np.array([7.0, 8.0, 9.0])
        data = build_sliding_windows(latents, theta, window=5, group=3)

        for alpha in (0, 6, 14):
            assert data.inputs[alpha, -1, 0] == alpha + 4
            assert data.targets[alpha, 0] == alpha + 5
            np.testing.assert_array_equal(data.inputs[alpha, :, 2:], np.tile(theta, (5, 1)))
        assert set(data.groups) == {3}

    def test_too_short(self):
        with pytest.raises(NetworkConfigError):
            build_sliding_windows(np.zeros((10, 2)), np.zeros(1), window=10)

    def test_merge(self):
        a = build_sliding_windows(np.zeros((6, 2)), np.zeros(1), 3, group=0)
        b = build_sliding_windows(np.ones((8, 2)), np.ones(1), 3, group=1)
        merged = merge_windows([a, b])
        assert len(merged) == 3 + 5
        assert list(np.unique(merged.groups)) == [0, 1]


class TestFeatureScaler:
    """Tests for min-max scaling."""

    def test_round_trip(self):
        data = np.random.default_rng(0).normal(100.0, 30.0, (50, 3))
        scaler = FeatureScaler.fit(data)
        np.testing.assert_allclose(scaler.inverse(scaler.transform(data)), data, atol=1e-12)

    def test_range(self):
        data = np.random.default_rng(1).uniform(-5, 9, (40, 2))
        scaled = FeatureScaler.fit(data).transform(data)
        np.testing.assert_allclose(scaled.min(axis=0), -1.0)
        np.testing.assert_allclose(scaled.max(axis=0), 1.0)

    def test_constant_feature_maps_to_zero(self):
        data = np.column_stack([np.full(5, 3.0), np.arange(5.0)])
        scaled = FeatureScaler.fit(data).transform(data)
        np.testing.assert_array_equal(scaled[:, 0], 0.0)

    def test_contains(self):
        scaler = FeatureScaler.fit(np.array([[0.0], [1.0]]))
        assert scaler.contains(np.array([[0.5]]))
        assert not scaler.contains(np.array([[1.5]]))
