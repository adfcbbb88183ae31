"""
Normalized root-mean-squared error between true and predicted fields.
"""

import logging
import warnings
from typing import Optional

import numpy as np

from utils.errors import NumericalFailure

logger = logging.getLogger(__name__)


class UndefinedNormalizationError(NumericalFailure):
    """Raised when the true field is constant, so max - min is zero."""
    pass


class NormalizationWarning(UserWarning):
    """Some time steps have a constant true field; their nRMSE is NaN."""
    pass


def _column(field: np.ndarray, t_index: Optional[int]) -> np.ndarray:
    field = np.asarray(field, dtype=np.float64)
    if t_index is None:
        return field.ravel()
    if field.ndim != 2:
        raise NumericalFailure(f"Time index given for a field of shape {field.shape}")
    return field[:, t_index]


def nrmse(truth: np.ndarray, prediction: np.ndarray, t_index: Optional[int] = None) -> float:
    """
    RMSE over nodes divided by the range of the true field.

        nRMSE = sqrt(mean_k (u_k - û_k)^2) / (max_k u_k - min_k u_k)

    Args:
        truth: True field (N_h,) or snapshot matrix (N_h, N_t)
        prediction: Predicted field of the same shape
        t_index: Column to compare when matrices are given

    Raises:
        UndefinedNormalizationError: If the true field is constant
    """
    u = _column(truth, t_index)
    u_hat = _column(prediction, t_index)
    if u.shape != u_hat.shape:
        raise NumericalFailure(f"Truth shape {u.shape} differs from prediction {u_hat.shape}")

    spread = float(u.max() - u.min())
    if spread == 0.0:
        where = '' if t_index is None else f' at t_{t_index}'
        raise UndefinedNormalizationError(f"True field is constant{where}; nRMSE undefined")
    return float(np.sqrt(np.mean((u - u_hat) ** 2)) / spread)


def nrmse_series(truth: np.ndarray, prediction: np.ndarray) -> np.ndarray:
    """
    nRMSE at every time step; constant true columns come back as NaN.

    Returns:
        (N_t,) array
    """
    truth = np.asarray(truth, dtype=np.float64)
    prediction = np.asarray(prediction, dtype=np.float64)
    if truth.shape != prediction.shape or truth.ndim != 2:
        raise NumericalFailure(f"Need matching 2D fields, got {truth.shape} and {prediction.shape}")

    spread = truth.max(axis=0) - truth.min(axis=0)
    rmse = np.sqrt(np.mean((truth - prediction) ** 2, axis=0))
    undefined = spread == 0.0
    out = np.full(truth.shape[1], np.nan)
    out[~undefined] = rmse[~undefined] / spread[~undefined]

    if undefined.any():
        steps = np.nonzero(undefined)[0]
        message = f"nRMSE undefined at {steps.size} constant time step(s), first t_{steps[0]}"
        logger.warning(message)
        warnings.warn(message, NormalizationWarning)
    return out
