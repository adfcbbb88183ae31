"""
Parameter sampling: truncated Gaussian draws inside the 8-sigma box.
"""

import logging
from typing import List, Optional, Union

import numpy as np

from hfm.parameters import ParameterSpace, ParameterVector
from utils.errors import ConfigurationError

logger = logging.getLogger(__name__)

MAX_REDRAW_ROUNDS = 1000

SeedLike = Union[int, np.random.Generator, None]


class SamplingError(ConfigurationError):
    """Raised for invalid sample counts."""
    pass


def as_generator(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def sample_gaussian_array(space: ParameterSpace, r: int, seed: SeedLike = None) -> np.ndarray:
    """
    (r, xi) array of independent per-feature draws inside the bounds.

    Normal features are redrawn entry by entry until they land in
    [mean - 4 std, mean + 4 std]; uniform features are drawn on the box.
    """
    if r < 1:
        raise SamplingError(f"Sample count must be >= 1, got {r}")

    rng = as_generator(seed)
    lower, upper = space.lower, space.upper
    out = np.empty((r, space.dim))
    for j, feature in enumerate(space.features):
        if feature.distribution == 'uniform':
            out[:, j] = rng.uniform(lower[j], upper[j], r)
            continue

        column = rng.normal(feature.mean, feature.std, r)
        for _ in range(MAX_REDRAW_ROUNDS):
            outside = (column < lower[j]) | (column > upper[j])
            if not outside.any():
                break
            column[outside] = rng.normal(feature.mean, feature.std, int(outside.sum()))
        else:
            # Unreachable in practice: P(|z| > 4) is about 6e-5 per draw
            column = np.clip(column, lower[j], upper[j])
        out[:, j] = column
    return out


def sample_gaussian(space: ParameterSpace, r: int, seed: SeedLike = None) -> List[ParameterVector]:
    """r ParameterVectors drawn by sample_gaussian_array."""
    return space.vectors(sample_gaussian_array(space, r, seed))


def sample_feasible(space: ParameterSpace, r: int, seed: SeedLike = None,
                    feasible=None) -> np.ndarray:
    """
    Gaussian draws filtered by a feasibility predicate (rows redrawn until valid).

    Args:
        space: Parameter space
        r: Number of rows
        seed: Seed or generator
        feasible: Callable(row) -> bool; None accepts every row
    """
    rng = as_generator(seed)
    rows = sample_gaussian_array(space, r, rng)
    if feasible is None:
        return rows
    for _ in range(MAX_REDRAW_ROUNDS):
        bad = np.array([not feasible(row) for row in rows])
        if not bad.any():
            return rows
        rows[bad] = sample_gaussian_array(space, int(bad.sum()), rng)
    raise SamplingError(f"Could not draw {r} feasible samples")
