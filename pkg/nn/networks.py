"""
The three surrogate networks: convolutional autoencoder, FFNN and LSTM.
"""

import math
from dataclasses import dataclass

import numpy as np

from nn.autodiff import Tensor, reshape
from nn.layers import (
    LSTM,
    Conv2D,
    Dense,
    Flatten,
    MaxPool2D,
    NetworkConfigError,
    Reshape,
    Sequential,
    UpSample2D,
)

CAE_SIDE_MULTIPLE = 8
FFNN_HIDDEN = 50
LSTM_UNITS = 50
LSTM_LAYERS = 3


def image_side(padded_rank: int) -> int:
    """Side of the square latent image; rank must be a square with side divisible by 8."""
    side = math.isqrt(padded_rank)
    if padded_rank < 1 or side * side != padded_rank:
        raise NetworkConfigError(f"Padded rank {padded_rank} is not a perfect square")
    if side % CAE_SIDE_MULTIPLE:
        raise NetworkConfigError(
            f"Image side {side} must be a multiple of {CAE_SIDE_MULTIPLE} for the decoder"
        )
    return side


@dataclass
class Autoencoder:
    encoder: Sequential
    decoder: Sequential
    side: int
    latent_dim: int

    @property
    def input_dim(self) -> int:
        return self.side * self.side

    def parameters(self):
        return self.encoder.parameters() + self.decoder.parameters()

    def to_image(self, x: Tensor) -> Tensor:
        return reshape(x, (x.shape[0], 1, self.side, self.side))

    def encode_tensor(self, x: Tensor) -> Tensor:
        return self.encoder(self.to_image(x))

    def decode_tensor(self, z: Tensor) -> Tensor:
        out = self.decoder(z)
        return reshape(out, (out.shape[0], self.input_dim))

    def __call__(self, x: Tensor) -> Tensor:
        return self.decode_tensor(self.encode_tensor(x))

    def encode(self, x: np.ndarray) -> np.ndarray:
        return self.encode_tensor(Tensor(np.atleast_2d(x))).data

    def decode(self, z: np.ndarray) -> np.ndarray:
        return self.decode_tensor(Tensor(np.atleast_2d(z))).data


def build_cae(padded_rank: int, latent_dim: int = 4, seed: int = 0) -> Autoencoder:
    """
    Convolutional autoencoder over the padded reduced coordinates.

    Encoder: conv 25 -> pool -> conv 10 -> pool -> flatten -> dense 20 ->
    dense 10 -> dense q. Decoder: dense 10 -> dense 20 -> dense ->
    (3, s/8, s/8) -> conv 10 -> up -> conv 25 -> up -> conv 30 -> up -> conv 1.
    3x3 kernels, ELU everywhere except the linear latent and output layers.
    """
    if latent_dim < 1:
        raise NetworkConfigError(f"Latent dimension must be >= 1, got {latent_dim}")
    side = image_side(padded_rank)
    if latent_dim >= padded_rank:
        raise NetworkConfigError(f"Latent dimension {latent_dim} must be below {padded_rank}")
    rng = np.random.default_rng(seed)
    quarter, eighth = side // 4, side // 8

    encoder = Sequential([
        Conv2D(1, 25, 'elu', 'enc_conv1', rng),
        MaxPool2D('enc_pool1'),
        Conv2D(25, 10, 'elu', 'enc_conv2', rng),
        MaxPool2D('enc_pool2'),
        Flatten('enc_flatten'),
        Dense(10 * quarter * quarter, 20, 'elu', 'enc_dense1', rng),
        Dense(20, 10, 'elu', 'enc_dense2', rng),
        Dense(10, latent_dim, 'linear', 'enc_latent', rng),
    ], name='encoder')

    decoder = Sequential([
        Dense(latent_dim, 10, 'elu', 'dec_dense1', rng),
        Dense(10, 20, 'elu', 'dec_dense2', rng),
        Dense(20, 3 * eighth * eighth, 'elu', 'dec_dense3', rng),
        Reshape((3, eighth, eighth), 'dec_reshape'),
        Conv2D(3, 10, 'elu', 'dec_conv1', rng),
        UpSample2D('dec_up1'),
        Conv2D(10, 25, 'elu', 'dec_conv2', rng),
        UpSample2D('dec_up2'),
        Conv2D(25, 30, 'elu', 'dec_conv3', rng),
        UpSample2D('dec_up3'),
        Conv2D(30, 1, 'linear', 'dec_out', rng),
    ], name='decoder')

    return Autoencoder(encoder, decoder, side, latent_dim)


def build_ffnn(n_features: int, latent_dim: int = 4, seed: int = 0) -> Sequential:
    """Map [t; θ] (width xi + 1) to the latent vector."""
    if n_features < 1:
        raise NetworkConfigError(f"Need at least one parameter feature, got {n_features}")
    rng = np.random.default_rng(seed)
    return Sequential([
        Dense(n_features + 1, FFNN_HIDDEN, 'leaky_relu', 'ffnn_hidden', rng),
        Dense(FFNN_HIDDEN, latent_dim, 'linear', 'ffnn_out', rng),
    ], name='ffnn')


def build_lstm(latent_dim: int, n_features: int, window: int, seed: int = 0) -> Sequential:
    """Three stacked 50-unit LSTMs reading (w, q + xi) windows, then dense to q."""
    if window < 1:
        raise NetworkConfigError(f"Window must be >= 1, got {window}")
    rng = np.random.default_rng(seed)
    width = latent_dim + n_features
    layers = []
    for k in range(LSTM_LAYERS):
        layers.append(LSTM(
            width if k == 0 else LSTM_UNITS,
            LSTM_UNITS,
            return_sequences=k < LSTM_LAYERS - 1,
            name=f'lstm{k + 1}',
            rng=rng,
        ))
    layers.append(Dense(LSTM_UNITS, latent_dim, 'linear', 'lstm_out', rng))
    return Sequential(layers, name='lstm')
