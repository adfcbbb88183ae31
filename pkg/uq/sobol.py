"""
Variance-based sensitivity: Saltelli design, first-order and total Sobol
indices with bootstrap confidence intervals.

Design rows come in blocks of N: A, B, AB_1..AB_xi, BA_1..BA_xi, where AB_i
is A with column i taken from B and BA_i is B with column i taken from A.
First-order indices use the Saltelli (2010) estimator and total indices the
Jansen estimator; both divide by the variance of the pooled A and B outputs.
"""

import logging
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from SALib.sample import sobol as sobol_sample
from scipy.stats import norm, truncnorm

from hfm.parameters import BOUND_SIGMAS, ParameterSpace
from uq.montecarlo import evaluate_all
from uq.sampling import SamplingError, SeedLike, as_generator
from uq.surrogates import Surrogate
from utils.errors import NumericalFailure

logger = logging.getLogger(__name__)

ESTIMATORS = 'saltelli2010/jansen'
DEFAULT_RESAMPLES = 100
DEFAULT_CONF_LEVEL = 0.95
SAMPLING_METHODS = ('sobol', 'random')


class SobolUndefinedError(NumericalFailure):
    """Raised when the output variance is zero, so indices are undefined."""
    pass


class SobolWarning(UserWarning):
    """Some outputs have zero variance; their indices are reported as NaN."""
    pass


@dataclass(frozen=True)
class SaltelliDesign:
    points: np.ndarray
    n_base: int
    names: Tuple[str, ...]

    @property
    def dim(self) -> int:
        return len(self.names)

    def block(self, index: int) -> np.ndarray:
        n = self.n_base
        return self.points[index * n:(index + 1) * n]

    @property
    def A(self) -> np.ndarray:
        return self.block(0)

    @property
    def B(self) -> np.ndarray:
        return self.block(1)

    def AB(self, feature: int) -> np.ndarray:
        return self.block(2 + feature)

    def BA(self, feature: int) -> np.ndarray:
        return self.block(2 + self.dim + feature)


def _to_distribution(space: ParameterSpace, u: np.ndarray) -> np.ndarray:
    """Map unit-cube columns through each feature's (truncated) inverse CDF."""
    out = np.empty_like(u)
    for j, feature in enumerate(space.features):
        if feature.distribution == 'uniform':
            out[:, j] = feature.lower + u[:, j] * (feature.upper - feature.lower)
        else:
            out[:, j] = truncnorm.ppf(u[:, j], -BOUND_SIGMAS, BOUND_SIGMAS,
                                      loc=feature.mean, scale=feature.std)
    return out


def _cross_blocks(base: np.ndarray, d: int) -> np.ndarray:
    """Stack A, B, AB_1..AB_xi, BA_1..BA_xi from an (N, 2 xi) base."""
    A, B = base[:, :d], base[:, d:]
    blocks = [A, B]
    for i in range(d):
        AB = A.copy()
        AB[:, i] = B[:, i]
        blocks.append(AB)
    for i in range(d):
        BA = B.copy()
        BA[:, i] = A[:, i]
        blocks.append(BA)
    return np.vstack(blocks)


def _salib_unit_design(d: int, n_base: int, rng: np.random.Generator) -> np.ndarray:
    """Scrambled Sobol design on the unit cube, regrouped into our block order."""
    problem = {
        'num_vars': d,
        'names': [f'x{j}' for j in range(d)],
        'bounds': [[0.0, 1.0]] * d,
    }
    rows = sobol_sample.sample(problem, n_base, calc_second_order=True, scramble=True, seed=rng)
    # SALib groups each base row as A, AB_1..AB_xi, BA_1..BA_xi, B
    grouped = rows.reshape(n_base, 2 * d + 2, d)
    order = [0, 2 * d + 1, *range(1, 2 * d + 1)]
    return grouped[:, order, :].transpose(1, 0, 2).reshape(-1, d)


def saltelli_sample(space: ParameterSpace, n_base: int, seed: SeedLike = None,
                    method: str = 'sobol') -> SaltelliDesign:
    """
    N(2 xi + 2) evaluation points for first-order and total indices.

    The 'sobol' design comes from SALib's Saltelli scheme on the unit cube;
    both methods then map every column through the feature distribution.

    Args:
        space: Independent features
        n_base: Base sample size N (a power of two for the Sobol sequence)
        seed: Seed or generator
        method: 'sobol' (scrambled low-discrepancy) or 'random'

    Raises:
        SamplingError: If N is invalid or the method is unknown
    """
    if method not in SAMPLING_METHODS:
        raise SamplingError(f"Unknown sampling method '{method}', expected {SAMPLING_METHODS}")
    if n_base < 1:
        raise SamplingError(f"Base sample size must be >= 1, got {n_base}")
    if method == 'sobol' and n_base & (n_base - 1):
        raise SamplingError(f"Base sample size {n_base} is not a power of two")

    d = space.dim
    rng = as_generator(seed)
    if method == 'sobol':
        unit = _salib_unit_design(d, n_base, rng)
    else:
        unit = _cross_blocks(rng.random((n_base, 2 * d)), d)
    return SaltelliDesign(_to_distribution(space, unit), n_base, space.names)


@dataclass(frozen=True)
class SaltelliEvaluations:
    """Surrogate outputs on a design, one row per design point."""
    design: SaltelliDesign
    outputs: np.ndarray

    def __post_init__(self):
        outputs = np.asarray(self.outputs, dtype=np.float64)
        if outputs.ndim == 1:
            outputs = outputs[:, None]
        if outputs.shape[0] != self.design.points.shape[0]:
            raise NumericalFailure(
                f"{outputs.shape[0]} outputs for {self.design.points.shape[0]} design points"
            )
        object.__setattr__(self, 'outputs', outputs)

    @property
    def n_outputs(self) -> int:
        return self.outputs.shape[1]

    def block(self, index: int) -> np.ndarray:
        n = self.design.n_base
        return self.outputs[index * n:(index + 1) * n]


def evaluate_design(surrogate: Surrogate, design: SaltelliDesign, jobs: int = 1) -> SaltelliEvaluations:
    """Evaluate every design point; each output is flattened to one row."""
    rows = [out.ravel() for out in evaluate_all(surrogate, list(design.points), jobs)]
    return SaltelliEvaluations(design, np.vstack(rows))


def _variance(f_A: np.ndarray, f_B: np.ndarray) -> np.ndarray:
    return np.var(np.concatenate([f_A, f_B]), axis=0)


def _first_order(f_A, f_B, f_AB) -> np.ndarray:
    with np.errstate(divide='ignore', invalid='ignore'):
        return np.mean(f_B * (f_AB - f_A), axis=0) / _variance(f_A, f_B)


def _total_order(f_A, f_B, f_AB) -> np.ndarray:
    with np.errstate(divide='ignore', invalid='ignore'):
        return 0.5 * np.mean((f_A - f_AB) ** 2, axis=0) / _variance(f_A, f_B)


def _bootstrap_conf(estimator, f_A, f_B, f_AB, num_resamples: int, conf_level: float,
                    rng: np.random.Generator) -> np.ndarray:
    """Half-width of the normal interval from bootstrap resamples of the base rows."""
    n = f_A.shape[0]
    draws = np.empty((num_resamples,) + f_A.shape[1:])
    for k in range(num_resamples):
        idx = rng.integers(0, n, n)
        draws[k] = estimator(f_A[idx], f_B[idx], f_AB[idx])
    z = norm.ppf(0.5 + conf_level / 2.0)
    return z * np.std(draws, axis=0, ddof=1)


@dataclass(frozen=True)
class SobolEstimate:
    value: float
    conf: float

    @property
    def low(self) -> float:
        return self.value - self.conf

    @property
    def high(self) -> float:
        return self.value + self.conf


def _single(evaluations: SaltelliEvaluations, feature: int, t_index: Optional[int], estimator,
            num_resamples: int, conf_level: float, seed: SeedLike) -> SobolEstimate:
    if not 0 <= feature < evaluations.design.dim:
        raise SamplingError(f"Feature index {feature} outside [0, {evaluations.design.dim})")
    column = 0 if t_index is None else t_index
    pick = slice(column, column + 1)
    f_A = evaluations.block(0)[:, pick]
    f_B = evaluations.block(1)[:, pick]
    f_AB = evaluations.block(2 + feature)[:, pick]
    if float(_variance(f_A, f_B)[0]) == 0.0:
        raise SobolUndefinedError(f"Output {column} has zero variance; Sobol indices undefined")
    value = float(estimator(f_A, f_B, f_AB)[0])
    conf = float(_bootstrap_conf(estimator, f_A, f_B, f_AB, num_resamples, conf_level,
                                 as_generator(seed))[0])
    return SobolEstimate(value, conf)


def sobol_first(evaluations: SaltelliEvaluations, feature: int, t_index: Optional[int] = None,
                num_resamples: int = DEFAULT_RESAMPLES, conf_level: float = DEFAULT_CONF_LEVEL,
                seed: SeedLike = 0) -> SobolEstimate:
    """
    First-order index S_v at one output column.

    Raises:
        SobolUndefinedError: If that output has zero variance
    """
    return _single(evaluations, feature, t_index, _first_order, num_resamples, conf_level, seed)


def sobol_total(evaluations: SaltelliEvaluations, feature: int, t_index: Optional[int] = None,
                num_resamples: int = DEFAULT_RESAMPLES, conf_level: float = DEFAULT_CONF_LEVEL,
                seed: SeedLike = 0) -> SobolEstimate:
    """
    Total index S_Tv at one output column.

    Raises:
        SobolUndefinedError: If that output has zero variance
    """
    return _single(evaluations, feature, t_index, _total_order, num_resamples, conf_level, seed)


@dataclass(frozen=True)
class SobolResult:
    """Indices per feature (rows) and output column (columns)."""
    names: Tuple[str, ...]
    first: np.ndarray
    total: np.ndarray
    first_conf: np.ndarray
    total_conf: np.ndarray
    n_base: int
    estimator: str = ESTIMATORS

    def to_frame(self, times: Optional[Sequence[float]] = None) -> pd.DataFrame:
        """feature, t_index[, time], S, S_T, CI_low, CI_high, ST_CI_low, ST_CI_high"""
        d, k = self.first.shape
        frame = pd.DataFrame({
            'feature': np.repeat(self.names, k),
            't_index': np.tile(np.arange(k), d),
        })
        if times is not None:
            frame['time'] = np.tile(np.asarray(times, dtype=np.float64), d)
        frame['S'] = self.first.ravel()
        frame['S_T'] = self.total.ravel()
        frame['CI_low'] = (self.first - self.first_conf).ravel()
        frame['CI_high'] = (self.first + self.first_conf).ravel()
        frame['ST_CI_low'] = (self.total - self.total_conf).ravel()
        frame['ST_CI_high'] = (self.total + self.total_conf).ravel()
        return frame


def sobol_analysis(evaluations: SaltelliEvaluations, num_resamples: int = DEFAULT_RESAMPLES,
                   conf_level: float = DEFAULT_CONF_LEVEL, seed: SeedLike = 0) -> SobolResult:
    """
    All first-order and total indices with bootstrap half-widths.

    Zero-variance output columns are reported as NaN with a SobolWarning.
    """
    design = evaluations.design
    d, k = design.dim, evaluations.n_outputs
    rng = as_generator(seed)
    f_A, f_B = evaluations.block(0), evaluations.block(1)

    first = np.empty((d, k))
    total = np.empty((d, k))
    first_conf = np.empty((d, k))
    total_conf = np.empty((d, k))
    for i in range(d):
        f_AB = evaluations.block(2 + i)
        first[i] = _first_order(f_A, f_B, f_AB)
        total[i] = _total_order(f_A, f_B, f_AB)
        first_conf[i] = _bootstrap_conf(_first_order, f_A, f_B, f_AB, num_resamples, conf_level, rng)
        total_conf[i] = _bootstrap_conf(_total_order, f_A, f_B, f_AB, num_resamples, conf_level, rng)

    undefined = _variance(f_A, f_B) == 0.0
    if undefined.any():
        for array in (first, total, first_conf, total_conf):
            array[:, undefined] = np.nan
        message = f"Sobol indices undefined for {int(undefined.sum())} zero-variance output(s)"
        logger.warning(message)
        warnings.warn(message, SobolWarning)

    logger.info(f"Sobol analysis: {d} features, {k} outputs, N={design.n_base}")
    return SobolResult(design.names, first, total, first_conf, total_conf, design.n_base)


def sobol_indices(surrogate: Surrogate, space: ParameterSpace, n_base: int, seed: SeedLike = 0,
                  jobs: int = 1, method: str = 'sobol',
                  num_resamples: int = DEFAULT_RESAMPLES) -> SobolResult:
    """Sample a Saltelli design, evaluate the surrogate and analyze."""
    rng = as_generator(seed)
    design = saltelli_sample(space, n_base, rng, method)
    evaluations = evaluate_design(surrogate, design, jobs)
    return sobol_analysis(evaluations, num_resamples, seed=rng)
