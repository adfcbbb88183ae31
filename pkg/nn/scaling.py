"""
Per-feature min-max scaling to [-1, 1].
"""

from dataclasses import dataclass

import numpy as np

from utils.errors import NumericalFailure


@dataclass(frozen=True)
class FeatureScaler:
    """
    Affine map x -> (x - center) / half_range per trailing-axis feature.

    Constant features get half_range 1 so they map to 0.
    """
    center: np.ndarray
    half_range: np.ndarray

    @classmethod
    def fit(cls, data: np.ndarray) -> 'FeatureScaler':
        data = np.asarray(data, dtype=np.float64)
        if data.size == 0:
            raise NumericalFailure("Cannot fit a scaler on empty data")
        flat = data.reshape(-1, data.shape[-1])
        lo, hi = flat.min(axis=0), flat.max(axis=0)
        half = (hi - lo) / 2.0
        half[half == 0] = 1.0
        return cls(center=(hi + lo) / 2.0, half_range=half)

    @classmethod
    def identity(cls, n_features: int) -> 'FeatureScaler':
        return cls(np.zeros(n_features), np.ones(n_features))

    @property
    def n_features(self) -> int:
        return self.center.shape[0]

    def transform(self, data: np.ndarray) -> np.ndarray:
        return (np.asarray(data, dtype=np.float64) - self.center) / self.half_range

    def inverse(self, data: np.ndarray) -> np.ndarray:
        return np.asarray(data, dtype=np.float64) * self.half_range + self.center

    def contains(self, data: np.ndarray, atol: float = 1e-9) -> bool:
        """True when every value maps inside [-1, 1]."""
        scaled = self.transform(data)
        return bool(np.all(np.abs(scaled) <= 1.0 + atol))
