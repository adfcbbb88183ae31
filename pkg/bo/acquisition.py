"""
Acquisition functions and candidate-pool maximization.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np
from scipy.stats import norm

from bo.design import lhs_design
from gpr.model import GprModel, posterior
from hfm.parameters import ParameterSpace, ParameterVector
from utils.errors import ConfigurationError, NumericalFailure

logger = logging.getLogger(__name__)

ACQUISITION_KINDS = ('PI', 'EI')

ArrayLike = Union[float, np.ndarray]


class AcquisitionError(NumericalFailure):
    """Raised when no candidate can be scored."""
    pass


class AcquisitionConfigError(ConfigurationError):
    pass


@dataclass(frozen=True)
class AcquisitionConfig:
    """Acquisition kind, exploration parameter xi and candidate pool size."""
    kind: str = 'EI'
    xi: float = 0.01
    pool_size: int = 10_000

    def __post_init__(self):
        kind = str(self.kind).upper()
        if kind not in ACQUISITION_KINDS:
            raise AcquisitionConfigError(
                f"Unknown acquisition '{self.kind}', expected one of {ACQUISITION_KINDS}"
            )
        object.__setattr__(self, 'kind', kind)
        if self.xi < 0:
            raise AcquisitionConfigError(f"xi must be >= 0, got {self.xi}")
        if self.pool_size < 1:
            raise AcquisitionConfigError(f"pool_size must be >= 1, got {self.pool_size}")


def _scalar_or_array(values: np.ndarray, scalar: bool) -> ArrayLike:
    return float(values.reshape(-1)[0]) if scalar else values


def acquisition_pi(mu: ArrayLike, sigma: ArrayLike, f_max: float, xi: float = 0.0) -> ArrayLike:
    """
    Probability of improvement Phi((mu - f_max - xi) / sigma).

    Where sigma is 0 the score is 1 if the improvement is positive, else 0.
    """
    scalar = np.ndim(mu) == 0 and np.ndim(sigma) == 0
    mu, sigma = np.broadcast_arrays(np.asarray(mu, float), np.asarray(sigma, float))
    delta = np.atleast_1d(mu - f_max - xi)
    sigma = np.atleast_1d(sigma)

    out = np.where(delta > 0, 1.0, 0.0)
    pos = sigma > 0
    out[pos] = norm.cdf(delta[pos] / sigma[pos])
    return _scalar_or_array(out, scalar)


def acquisition_ei(mu: ArrayLike, sigma: ArrayLike, f_max: float, xi: float = 0.0) -> ArrayLike:
    """
    Expected improvement sigma phi(z) + delta Phi(z), z = delta / sigma.

    Where sigma is 0 the score is max(delta, 0).
    """
    scalar = np.ndim(mu) == 0 and np.ndim(sigma) == 0
    mu, sigma = np.broadcast_arrays(np.asarray(mu, float), np.asarray(sigma, float))
    delta = np.atleast_1d(mu - f_max - xi)
    sigma = np.atleast_1d(sigma)

    out = np.maximum(delta, 0.0)
    pos = sigma > 0
    z = delta[pos] / sigma[pos]
    out[pos] = sigma[pos] * norm.pdf(z) + delta[pos] * norm.cdf(z)
    return _scalar_or_array(np.maximum(out, 0.0), scalar)


ACQUISITIONS = {'PI': acquisition_pi, 'EI': acquisition_ei}


def score_candidates(model: GprModel, pool: np.ndarray, f_max: float,
                     acq: AcquisitionConfig) -> np.ndarray:
    """Acquisition score for every row of the candidate pool."""
    pool = np.atleast_2d(np.asarray(pool, dtype=np.float64))
    if pool.shape[0] == 0:
        raise AcquisitionError("Candidate pool is empty")
    mu, var = posterior(model, pool)
    return ACQUISITIONS[acq.kind](mu, np.sqrt(var), f_max, acq.xi)


def propose_from_pool(model: GprModel, pool: np.ndarray, f_max: float,
                      acq: AcquisitionConfig) -> int:
    """Index of the best candidate; ties go to the lowest index."""
    scores = score_candidates(model, pool, f_max, acq)
    if not np.any(np.isfinite(scores)):
        raise AcquisitionError("No candidate has a finite acquisition score")
    return int(np.argmax(np.where(np.isfinite(scores), scores, -np.inf)))


def propose_next(model: GprModel, acq: AcquisitionConfig, space: ParameterSpace,
                 f_max: float, seed=None,
                 feasible: Optional[Callable[[np.ndarray], bool]] = None) -> ParameterVector:
    """
    Argmax of the acquisition over a seeded LHS pool of acq.pool_size points.

    Args:
        model: Fitted GPR on standardized targets
        acq: Acquisition settings
        space: Parameter space (pool bounds)
        f_max: Best (largest) standardized target so far
        seed: Seed or generator for the pool
        feasible: Optional row predicate; failing candidates are dropped

    Raises:
        AcquisitionError: If the filtered pool is empty
    """
    pool = lhs_design(space, acq.pool_size, seed)
    if feasible is not None:
        keep = np.array([feasible(row) for row in pool], dtype=bool)
        pool = pool[keep]
        if pool.shape[0] < acq.pool_size:
            logger.debug(f"Dropped {acq.pool_size - pool.shape[0]} infeasible candidates")
    if pool.shape[0] == 0:
        raise AcquisitionError("Candidate pool is empty after feasibility filtering")
    return space.vector(pool[propose_from_pool(model, pool, f_max, acq)])
