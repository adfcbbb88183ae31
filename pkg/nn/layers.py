"""
Network layers on top of the autodiff Tensor.

Weights are drawn uniform in ±1/sqrt(fan_in). Images are channels-first
(N, C, H, W).
"""

import math
from typing import Dict, List, Optional, Sequence, Tuple, Type

import numpy as np

from nn.autodiff import (
    ACTIVATIONS,
    Tensor,
    add,
    conv2d,
    matmul,
    maxpool2d,
    mul,
    parameter,
    reshape,
    sigmoid,
    stack,
    tanh,
    upsample2d,
)
from utils.errors import ConfigurationError


class NetworkConfigError(ConfigurationError):
    """Raised for inconsistent layer or network settings."""
    pass


def _uniform(rng: np.random.Generator, fan_in: int, shape: Tuple[int, ...]) -> np.ndarray:
    limit = 1.0 / math.sqrt(fan_in)
    return rng.uniform(-limit, limit, size=shape)


def _activation(name: str):
    try:
        return ACTIVATIONS[name]
    except KeyError:
        raise NetworkConfigError(
            f"Unknown activation '{name}', expected one of {sorted(ACTIVATIONS)}"
        ) from None


class Layer:
    """Base layer: parameters, forward call and a serializable config."""
    kind = 'layer'

    def __init__(self, name: str):
        self.name = name

    def parameters(self) -> List[Tensor]:
        return []

    def __call__(self, x: Tensor) -> Tensor:
        raise NotImplementedError

    def config(self) -> Dict[str, object]:
        return {'kind': self.kind, 'name': self.name}


class Dense(Layer):
    kind = 'dense'

    def __init__(self, in_features: int, out_features: int, activation: str = 'linear',
                 name: str = 'dense', rng: Optional[np.random.Generator] = None):
        super().__init__(name)
        if in_features < 1 or out_features < 1:
            raise NetworkConfigError(f"{name}: widths must be >= 1")
        rng = rng or np.random.default_rng(0)
        self.in_features = in_features
        self.out_features = out_features
        self.activation = activation
        self._act = _activation(activation)
        self.W = parameter(_uniform(rng, in_features, (in_features, out_features)), f'{name}.W')
        self.b = parameter(np.zeros(out_features), f'{name}.b')

    def parameters(self) -> List[Tensor]:
        return [self.W, self.b]

    def __call__(self, x: Tensor) -> Tensor:
        return self._act(add(matmul(x, self.W), self.b))

    def config(self) -> Dict[str, object]:
        return {**super().config(), 'in_features': self.in_features,
                'out_features': self.out_features, 'activation': self.activation}


class Conv2D(Layer):
    kind = 'conv2d'

    def __init__(self, in_channels: int, out_channels: int, activation: str = 'linear',
                 name: str = 'conv', rng: Optional[np.random.Generator] = None):
        super().__init__(name)
        rng = rng or np.random.default_rng(0)
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.activation = activation
        self._act = _activation(activation)
        fan_in = in_channels * 9
        self.W = parameter(_uniform(rng, fan_in, (out_channels, in_channels, 3, 3)), f'{name}.W')
        self.b = parameter(np.zeros(out_channels), f'{name}.b')

    def parameters(self) -> List[Tensor]:
        return [self.W, self.b]

    def __call__(self, x: Tensor) -> Tensor:
        if x.ndim != 4 or x.shape[1] != self.in_channels:
            raise NetworkConfigError(
                f"{self.name}: expected (N, {self.in_channels}, H, W), got {x.shape}"
            )
        return self._act(conv2d(x, self.W, self.b))

    def config(self) -> Dict[str, object]:
        return {**super().config(), 'in_channels': self.in_channels,
                'out_channels': self.out_channels, 'activation': self.activation}


class MaxPool2D(Layer):
    kind = 'maxpool2d'

    def __call__(self, x: Tensor) -> Tensor:
        return maxpool2d(x)


class UpSample2D(Layer):
    kind = 'upsample2d'

    def __call__(self, x: Tensor) -> Tensor:
        return upsample2d(x)


class Flatten(Layer):
    kind = 'flatten'

    def __call__(self, x: Tensor) -> Tensor:
        return reshape(x, (x.shape[0], -1))


class Reshape(Layer):
    """Reshape each sample to `shape` (batch axis kept)."""
    kind = 'reshape'

    def __init__(self, shape: Sequence[int], name: str = 'reshape'):
        super().__init__(name)
        self.shape = tuple(int(s) for s in shape)

    def __call__(self, x: Tensor) -> Tensor:
        return reshape(x, (x.shape[0],) + self.shape)

    def config(self) -> Dict[str, object]:
        return {**super().config(), 'shape': 'x'.join(str(s) for s in self.shape)}


class LSTM(Layer):
    """
    Recurrent layer with Keras gate layout: z = x W + h U + b split as
    (input, forget, candidate, output). Forget-gate bias starts at 1.
    """
    kind = 'lstm'

    def __init__(self, in_features: int, units: int, return_sequences: bool = False,
                 name: str = 'lstm', rng: Optional[np.random.Generator] = None):
        super().__init__(name)
        rng = rng or np.random.default_rng(0)
        self.in_features = in_features
        self.units = units
        self.return_sequences = return_sequences
        self.W = parameter(_uniform(rng, in_features, (in_features, 4 * units)), f'{name}.W')
        self.U = parameter(_uniform(rng, units, (units, 4 * units)), f'{name}.U')
        bias = np.zeros(4 * units)
        bias[units:2 * units] = 1.0
        self.b = parameter(bias, f'{name}.b')

    def parameters(self) -> List[Tensor]:
        return [self.W, self.U, self.b]

    def __call__(self, x: Tensor) -> Tensor:
        """(N, steps, in_features) -> (N, steps, units) or (N, units)."""
        if x.ndim != 3 or x.shape[2] != self.in_features:
            raise NetworkConfigError(
                f"{self.name}: expected (N, steps, {self.in_features}), got {x.shape}"
            )
        n, steps, _ = x.shape
        u = self.units
        h = Tensor(np.zeros((n, u)))
        c = Tensor(np.zeros((n, u)))
        outputs = []
        for t in range(steps):
            z = add(add(matmul(x[:, t, :], self.W), matmul(h, self.U)), self.b)
            i = sigmoid(z[:, :u])
            f = sigmoid(z[:, u:2 * u])
            g = tanh(z[:, 2 * u:3 * u])
            o = sigmoid(z[:, 3 * u:])
            c = add(mul(f, c), mul(i, g))
            h = mul(o, tanh(c))
            outputs.append(h)
        return stack(outputs, axis=1) if self.return_sequences else h

    def config(self) -> Dict[str, object]:
        return {**super().config(), 'in_features': self.in_features, 'units': self.units,
                'return_sequences': self.return_sequences}


LAYER_TYPES: Dict[str, Type[Layer]] = {
    cls.kind: cls for cls in (Dense, Conv2D, MaxPool2D, UpSample2D, Flatten, Reshape, LSTM)
}


def _parse_bool(value) -> bool:
    if isinstance(value, bool):
        return value
    return str(value).strip().lower() in ('true', '1', 'yes')


def layer_from_config(config: Dict[str, object]) -> Layer:
    """Rebuild a layer (with fresh weights) from its config()."""
    kind = str(config.get('kind'))
    name = str(config.get('name', kind))
    try:
        if kind == 'dense':
            return Dense(int(config['in_features']), int(config['out_features']),
                         str(config['activation']), name)
        if kind == 'conv2d':
            return Conv2D(int(config['in_channels']), int(config['out_channels']),
                          str(config['activation']), name)
        if kind == 'lstm':
            return LSTM(int(config['in_features']), int(config['units']),
                        _parse_bool(config['return_sequences']), name)
        if kind == 'reshape':
            return Reshape([int(s) for s in str(config['shape']).split('x')], name)
        if kind in LAYER_TYPES:
            return LAYER_TYPES[kind](name)
    except KeyError as e:
        raise NetworkConfigError(f"Layer '{name}' config lacks field {e}") from None
    raise NetworkConfigError(f"Unknown layer kind '{kind}'")


class Sequential:
    """Ordered layer stack."""

    def __init__(self, layers: Sequence[Layer], name: str = 'network'):
        self.layers = list(layers)
        self.name = name
        names = [layer.name for layer in self.layers]
        if len(set(names)) != len(names):
            raise NetworkConfigError(f"{name}: duplicate layer names {names}")

    def __call__(self, x: Tensor) -> Tensor:
        for layer in self.layers:
            x = layer(x)
        return x

    def parameters(self) -> List[Tensor]:
        return [p for layer in self.layers for p in layer.parameters()]

    def named_parameters(self) -> Dict[str, Tensor]:
        return {p.name: p for p in self.parameters()}

    def predict(self, x: np.ndarray) -> np.ndarray:
        """Forward pass on plain arrays, no graph kept for gradients."""
        return self(Tensor(x)).data

    def n_parameters(self) -> int:
        return int(sum(p.data.size for p in self.parameters()))
