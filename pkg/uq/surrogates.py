"""
Surrogates evaluated by the UQ and sensitivity routines.

Anything with `evaluate(theta) -> ndarray` works; the ROM bundle is wrapped
by BundleSurrogate, and two analytic models serve as oracles.
"""

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional, Protocol, Tuple

import numpy as np

from hfm.parameters import Feature, ParameterSpace
from utils.errors import ConfigurationError

if TYPE_CHECKING:
    from rom.bundle import RomBundle


class Surrogate(Protocol):
    def evaluate(self, theta: np.ndarray) -> np.ndarray:
        ...


@dataclass
class BundleSurrogate:
    """
    ROM predictions for n_t steps; with `node` set, only that node's series.
    """
    bundle: "RomBundle"
    n_t: int
    node: Optional[int] = None

    def __post_init__(self):
        if self.node is not None and not 0 <= self.node < self.bundle.n_nodes:
            raise ConfigurationError(
                f"Node {self.node} outside [0, {self.bundle.n_nodes}) for this bundle"
            )

    def evaluate(self, theta: np.ndarray) -> np.ndarray:
        from rom.online import predict  # rom imports bo, which imports uq

        field = predict(self.bundle, theta, self.n_t).values
        return field if self.node is None else field[self.node]

    def at_node(self, node: int) -> 'BundleSurrogate':
        return BundleSurrogate(self.bundle, self.n_t, node)


@dataclass(frozen=True)
class IshigamiSurrogate:
    """f = sin x1 + a sin^2 x2 + b x3^4 sin x1 on [-pi, pi]^3."""
    a: float = 7.0
    b: float = 0.1

    @staticmethod
    def space() -> ParameterSpace:
        # mean ± 4 std spans [-pi, pi]
        return ParameterSpace(tuple(
            Feature(f'x{i}', 0.0, math.pi / 4.0, 'uniform') for i in (1, 2, 3)
        ))

    def evaluate(self, theta: np.ndarray) -> np.ndarray:
        x1, x2, x3 = np.asarray(theta, dtype=np.float64).ravel()
        value = math.sin(x1) + self.a * math.sin(x2) ** 2 + self.b * x3 ** 4 * math.sin(x1)
        return np.array([value])

    def analytic_indices(self) -> Tuple[np.ndarray, np.ndarray]:
        """Closed-form (first-order, total) indices for features x1, x2, x3."""
        a, b, pi = self.a, self.b, math.pi
        v1 = 0.5 * (1.0 + b * pi ** 4 / 5.0) ** 2
        v2 = a ** 2 / 8.0
        v13 = 8.0 * b ** 2 * pi ** 8 / 225.0
        total = v1 + v2 + v13
        first = np.array([v1, v2, 0.0]) / total
        total_effect = np.array([v1 + v13, v2, v13]) / total
        return first, total_effect


@dataclass(frozen=True)
class LinearToySurrogate:
    """u = coefficients * θ[feature]; Gaussian in, Gaussian out."""
    coefficients: Tuple[float, ...]
    feature: int = 0

    def evaluate(self, theta: np.ndarray) -> np.ndarray:
        theta = np.asarray(theta, dtype=np.float64).ravel()
        return np.asarray(self.coefficients, dtype=np.float64) * theta[self.feature]

    def analytic_moments(self, space: ParameterSpace) -> Tuple[np.ndarray, np.ndarray]:
        """(mean, std) of the output, ignoring the 4-sigma truncation."""
        c = np.asarray(self.coefficients, dtype=np.float64)
        feature = space.features[self.feature]
        return c * feature.mean, np.abs(c) * feature.std
