"""
Parameter vectors and the Gaussian parameter space they are drawn from.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple, Union

import numpy as np

from utils.errors import ConfigurationError

REFERENCE_NAMES = ('E', 'nu', 'rho', 'T')

# Aluminium plate: E (GPa), nu (-), rho (kg/m^3), T (deg C) as (mean, std)
REFERENCE_DISTRIBUTIONS = {
    'E': (68.9, 1.332),
    'nu': (0.33, 0.007),
    'rho': (2700.0, 2.7),
    'T': (25.0, 6.0),
}

BOUND_SIGMAS = 4.0
DISTRIBUTIONS = ('normal', 'uniform')


class ParameterError(ConfigurationError):
    """Raised when a parameter vector or space is invalid."""
    pass


@dataclass(frozen=True)
class ParameterVector:
    """One point in the feature space, e.g. θ = [E, ν, ρ, T]."""
    values: Tuple[float, ...]
    names: Tuple[str, ...] = REFERENCE_NAMES

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        names = tuple(self.names)
        if len(values) == 0:
            raise ParameterError("Parameter vector needs at least one feature")
        if len(values) != len(names):
            raise ParameterError(
                f"Got {len(values)} values for {len(names)} feature names {names}"
            )
        if not all(math.isfinite(v) for v in values):
            raise ParameterError(f"Parameter vector has non-finite entries: {values}")
        object.__setattr__(self, 'values', values)
        object.__setattr__(self, 'names', names)

    @property
    def dim(self) -> int:
        return len(self.values)

    def __getitem__(self, name: str) -> float:
        try:
            return self.values[self.names.index(name)]
        except ValueError:
            raise KeyError(f"No feature named {name!r} in {self.names}") from None

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.float64)

    def as_dict(self) -> Dict[str, float]:
        return dict(zip(self.names, self.values))

    @classmethod
    def from_array(cls, values: Sequence[float], names: Sequence[str] = REFERENCE_NAMES) -> 'ParameterVector':
        return cls(tuple(np.asarray(values, dtype=np.float64).ravel()), tuple(names))

    def __str__(self) -> str:
        inner = ', '.join(f'{n}={v:.6g}' for n, v in zip(self.names, self.values))
        return f'[{inner}]'


@dataclass(frozen=True)
class Feature:
    """
    One uncertain feature.

    'normal' features follow N(mean, std^2) truncated to mean ± 4 std;
    'uniform' features are uniform on the same box.
    """
    name: str
    mean: float
    std: float
    distribution: str = 'normal'

    def __post_init__(self):
        if not self.name:
            raise ParameterError("Feature name cannot be empty")
        if not math.isfinite(self.mean):
            raise ParameterError(f"Feature {self.name}: mean must be finite")
        if not (self.std > 0 and math.isfinite(self.std)):
            raise ParameterError(f"Feature {self.name}: std must be > 0, got {self.std}")
        if self.distribution not in DISTRIBUTIONS:
            raise ParameterError(
                f"Feature {self.name}: distribution must be one of {DISTRIBUTIONS}"
            )

    @property
    def lower(self) -> float:
        return self.mean - BOUND_SIGMAS * self.std

    @property
    def upper(self) -> float:
        return self.mean + BOUND_SIGMAS * self.std


@dataclass(frozen=True)
class ParameterSpace:
    """Uncorrelated features with bounds exactly mean ± 4 std."""
    features: Tuple[Feature, ...] = field(default_factory=tuple)

    def __post_init__(self):
        features = tuple(self.features)
        if not features:
            raise ParameterError("Parameter space needs at least one feature")
        names = [f.name for f in features]
        if len(set(names)) != len(names):
            raise ParameterError(f"Duplicate feature names: {names}")
        object.__setattr__(self, 'features', features)

    @classmethod
    def reference(cls) -> 'ParameterSpace':
        """Aluminium plate distributions for [E, nu, rho, T]."""
        return cls(tuple(
            Feature(name, *REFERENCE_DISTRIBUTIONS[name]) for name in REFERENCE_NAMES
        ))

    @classmethod
    def from_config(cls, entries: Iterable[Mapping[str, object]]) -> 'ParameterSpace':
        """Build from a list of {name, mean, std[, distribution]} mappings."""
        features = []
        for entry in entries:
            try:
                features.append(Feature(
                    name=str(entry['name']),
                    mean=float(entry['mean']),
                    std=float(entry['std']),
                    distribution=str(entry.get('distribution', 'normal')),
                ))
            except KeyError as e:
                raise ParameterError(f"Feature entry missing key {e}: {dict(entry)}") from None
        return cls(tuple(features))

    @property
    def dim(self) -> int:
        return len(self.features)

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(f.name for f in self.features)

    @property
    def means(self) -> np.ndarray:
        return np.array([f.mean for f in self.features])

    @property
    def stds(self) -> np.ndarray:
        return np.array([f.std for f in self.features])

    @property
    def lower(self) -> np.ndarray:
        return np.array([f.lower for f in self.features])

    @property
    def upper(self) -> np.ndarray:
        return np.array([f.upper for f in self.features])

    def contains(self, theta: Union[ParameterVector, Sequence[float]], atol: float = 0.0) -> bool:
        """True if every feature lies inside its bounds."""
        values = theta.as_array() if isinstance(theta, ParameterVector) else np.asarray(theta, float)
        if values.shape != (self.dim,):
            raise ParameterError(f"Expected {self.dim} features, got shape {values.shape}")
        return bool(np.all(values >= self.lower - atol) and np.all(values <= self.upper + atol))

    def vector(self, values: Sequence[float]) -> ParameterVector:
        """Wrap a row of a design matrix as a named ParameterVector."""
        values = np.asarray(values, dtype=np.float64).ravel()
        if values.shape != (self.dim,):
            raise ParameterError(f"Expected {self.dim} features, got {values.shape[0]}")
        return ParameterVector.from_array(values, self.names)

    def vectors(self, design: np.ndarray) -> List[ParameterVector]:
        """Rows of a (count, dim) design matrix as ParameterVectors."""
        return [self.vector(row) for row in np.atleast_2d(design)]

    def mean_vector(self) -> ParameterVector:
        return self.vector(self.means)
