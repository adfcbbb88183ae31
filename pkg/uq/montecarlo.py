"""
Forward Monte Carlo propagation: pointwise mean and sample std of the
surrogate output over a set of parameter draws.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence, Union

import numpy as np
import pandas as pd

from hfm.parameters import ParameterVector
from uq.surrogates import Surrogate
from utils.errors import ConfigurationError, NumericalFailure, RomToolkitError

logger = logging.getLogger(__name__)

ThetaRow = Union[ParameterVector, np.ndarray]


class UqConfigError(ConfigurationError):
    pass


class SampleEvaluationError(NumericalFailure):
    """A surrogate evaluation failed; carries θ and the original error."""

    def __init__(self, theta: np.ndarray, cause: BaseException):
        self.theta = theta
        self.cause = cause
        super().__init__(f"Surrogate failed for θ={np.asarray(theta).tolist()}: {cause}")


@dataclass
class UqResult:
    """Pointwise mean and Bessel-corrected std; fields shaped like one surrogate output."""
    mean: np.ndarray
    std: np.ndarray
    r: int
    seed: Optional[int] = None

    def to_frame(self, times: Optional[np.ndarray] = None) -> pd.DataFrame:
        """Long format: node, t_index[, time], mean, std."""
        mean = np.atleast_2d(self.mean)
        std = np.atleast_2d(self.std)
        n_nodes, n_t = mean.shape
        frame = pd.DataFrame({
            'node': np.repeat(np.arange(n_nodes), n_t),
            't_index': np.tile(np.arange(n_t), n_nodes),
        })
        if times is not None:
            frame['time'] = np.tile(np.asarray(times, dtype=np.float64), n_nodes)
        frame['mean'] = mean.ravel()
        frame['std'] = std.ravel()
        return frame


def _as_array(theta: ThetaRow) -> np.ndarray:
    if isinstance(theta, ParameterVector):
        return theta.as_array()
    return np.asarray(theta, dtype=np.float64).ravel()


def evaluate_all(surrogate: Surrogate, samples: Sequence[ThetaRow], jobs: int = 1) -> Iterator[np.ndarray]:
    """
    Surrogate outputs in sample order.

    With jobs > 1 evaluations run on a thread pool; results still arrive in order.

    Raises:
        SampleEvaluationError: For the first failing θ
    """
    rows = [_as_array(theta) for theta in samples]

    def run(theta: np.ndarray) -> np.ndarray:
        try:
            return np.asarray(surrogate.evaluate(theta), dtype=np.float64)
        except (RomToolkitError, ArithmeticError, ValueError) as e:
            raise SampleEvaluationError(theta, e) from e

    if jobs <= 1:
        for theta in rows:
            yield run(theta)
        return
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        yield from pool.map(run, rows)


def monte_carlo_uq(surrogate: Surrogate, samples: Sequence[ThetaRow], jobs: int = 1,
                   seed: Optional[int] = None) -> UqResult:
    """
    Mean and sample std (r - 1 denominator) of the surrogate over the samples.

    Moments are accumulated with Welford's update so only one output is held
    at a time.

    Args:
        surrogate: Object with evaluate(theta)
        samples: r >= 2 parameter vectors
        jobs: Worker threads for the evaluations
        seed: Seed that produced the samples, recorded in the result

    Raises:
        UqConfigError: If r < 2
        SampleEvaluationError: If any evaluation fails
    """
    r = len(samples)
    if r < 2:
        raise UqConfigError(f"Monte Carlo needs at least 2 samples, got {r}")

    count = 0
    mean = m2 = None
    for output in evaluate_all(surrogate, samples, jobs):
        if mean is None:
            mean = np.zeros_like(output)
            m2 = np.zeros_like(output)
        elif output.shape != mean.shape:
            raise NumericalFailure(f"Output shape changed from {mean.shape} to {output.shape}")
        if not np.all(np.isfinite(output)):
            raise SampleEvaluationError(_as_array(samples[count]), ValueError("non-finite output"))
        count += 1
        delta = output - mean
        mean += delta / count
        m2 += delta * (output - mean)
        if count % 100 == 0:
            logger.debug(f"Monte Carlo: {count}/{r} samples")

    std = np.sqrt(np.maximum(m2, 0.0) / (count - 1))
    logger.info(f"Monte Carlo UQ over {count} samples: max std {float(std.max()):.3e}")
    return UqResult(mean=mean, std=std, r=count, seed=seed)


def uq_band(result: UqResult, node: int, times: Optional[np.ndarray] = None) -> pd.DataFrame:
    """Mean ± std series at one node: t_index[, time], mean, std, lower, upper."""
    mean = np.atleast_2d(result.mean)
    if not 0 <= node < mean.shape[0]:
        raise UqConfigError(f"Node {node} outside [0, {mean.shape[0]})")
    std = np.atleast_2d(result.std)[node]
    frame = pd.DataFrame({'t_index': np.arange(mean.shape[1])})
    if times is not None:
        frame['time'] = np.asarray(times, dtype=np.float64)
    frame['mean'] = mean[node]
    frame['std'] = std
    frame['lower'] = mean[node] - std
    frame['upper'] = mean[node] + std
    return frame
