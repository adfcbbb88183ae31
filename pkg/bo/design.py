"""
Latin hypercube designs over the parameter box.
"""

from typing import List

import numpy as np
from scipy.stats import qmc

from hfm.parameters import ParameterSpace, ParameterVector
from uq.sampling import SamplingError, as_generator


def lhs_design(space: ParameterSpace, count: int, seed=None) -> np.ndarray:
    """
    (count, xi) Latin hypercube over [lower, upper].

    Each feature range is split into `count` equal strata with exactly one
    point per stratum; strata are permuted independently per feature.
    """
    if count < 1:
        raise SamplingError(f"LHS count must be >= 1, got {count}")
    sampler = qmc.LatinHypercube(d=space.dim, seed=as_generator(seed))
    return qmc.scale(sampler.random(count), space.lower, space.upper)


def lhs_sample(space: ParameterSpace, count: int, seed=None) -> List[ParameterVector]:
    return space.vectors(lhs_design(space, count, seed))
