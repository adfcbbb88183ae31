"""
Online phase: full-field prediction for an unseen parameter vector.

The FFNN supplies the first w latent vectors from [t; θ]; the LSTM then
rolls out closed-loop, each prediction feeding the next window. The decoder
and the padded basis map latents back to the full field.
"""

import logging
import warnings
from typing import Sequence, Tuple, Union

import numpy as np

from hfm.parameters import ParameterVector
from hfm.solver import SnapshotMatrix
from nn.windows import window_inputs
from reduce.projection import project
from rom.bundle import RomBundle
from utils.errors import ConfigurationError, NumericalFailure

logger = logging.getLogger(__name__)

# Rollout steps larger than this multiple of the largest training step are flagged
CONTINUITY_FACTOR = 10.0

ThetaLike = Union[ParameterVector, Sequence[float], np.ndarray]


class ExtrapolationWarning(UserWarning):
    """θ lies outside the parameter box the bundle was trained on."""
    pass


class RolloutWarning(UserWarning):
    """A predicted latent trajectory jumps further than anything seen in training."""
    pass


def _theta_array(bundle: RomBundle, theta: ThetaLike) -> np.ndarray:
    if isinstance(theta, ParameterVector):
        if theta.names != bundle.feature_names:
            raise ConfigurationError(
                f"θ features {theta.names} differ from bundle features {bundle.feature_names}"
            )
        values = theta.as_array()
    else:
        values = np.asarray(theta, dtype=np.float64).ravel()
    if values.shape != (bundle.n_features,):
        raise ConfigurationError(f"Expected {bundle.n_features} features, got {values.shape[0]}")
    return values


def _check_bounds(bundle: RomBundle, values: np.ndarray) -> None:
    outside = (values < bundle.lower) | (values > bundle.upper)
    if outside.any():
        names = [n for n, o in zip(bundle.feature_names, outside) if o]
        message = f"θ={values.tolist()} outside training bounds for {names}; extrapolating"
        logger.warning(message)
        warnings.warn(message, ExtrapolationWarning)


def first_window_latents(bundle: RomBundle, theta_scaled: np.ndarray, times: np.ndarray) -> np.ndarray:
    """Scaled latents for the given time stamps from the FFNN."""
    t_scaled = bundle.scalers['time'].transform(times[:, None])
    inputs = np.hstack([t_scaled, np.broadcast_to(theta_scaled, (times.size, theta_scaled.size))])
    return bundle.ffnn.predict(inputs)


def lstm_step(bundle: RomBundle, window: np.ndarray, theta_scaled: np.ndarray) -> np.ndarray:
    """Next scaled latent from a (w, q) window of scaled latents."""
    x = window_inputs(window, theta_scaled)[None, :, :]
    return bundle.lstm.predict(x)[0]


def rollout_latents(bundle: RomBundle, theta_scaled: np.ndarray, n_t: int) -> np.ndarray:
    """(n_t, q) scaled latent trajectory: FFNN start, closed-loop LSTM afterwards."""
    w = bundle.window
    times = bundle.times(n_t)
    head = min(w, n_t)
    latents = np.empty((n_t, bundle.latent_dim))
    latents[:head] = first_window_latents(bundle, theta_scaled, times[:head])
    for i in range(w, n_t):
        latents[i] = lstm_step(bundle, latents[i - w:i], theta_scaled)
    return latents


def decode_latents(bundle: RomBundle, latents_scaled: np.ndarray) -> np.ndarray:
    """(n_t, q) scaled latents -> (N_h, n_t) full field."""
    latents = bundle.scalers['latent'].inverse(latents_scaled)
    coords_scaled = bundle.cae.decode(latents)
    coords = bundle.scalers['coord'].inverse(coords_scaled)
    return bundle.basis @ coords.T


def _continuity_check(bundle: RomBundle, latents_scaled: np.ndarray, theta: np.ndarray) -> None:
    if latents_scaled.shape[0] < 2 or bundle.max_latent_step <= 0:
        return
    steps = np.linalg.norm(np.diff(latents_scaled, axis=0), axis=1)
    limit = CONTINUITY_FACTOR * bundle.max_latent_step
    jumps = np.nonzero(steps > limit)[0]
    if jumps.size:
        message = (f"Latent rollout for θ={theta.tolist()} jumps {steps.max():.3g} "
                   f"(limit {limit:.3g}) first at step {jumps[0] + 1}")
        logger.warning(message)
        warnings.warn(message, RolloutWarning)


def predict(bundle: RomBundle, theta: ThetaLike, n_t: int) -> SnapshotMatrix:
    """
    Predict the N_h x n_t field for θ.

    Args:
        bundle: Trained surrogate
        theta: Parameter vector (outside the training box only warns)
        n_t: Number of time steps to predict

    Returns:
        SnapshotMatrix whose times continue the training time grid

    Raises:
        ConfigurationError: If n_t < 1 or θ has the wrong width
    """
    if n_t < 1:
        raise ConfigurationError(f"Prediction horizon must be >= 1, got {n_t}")
    values = _theta_array(bundle, theta)
    _check_bounds(bundle, values)

    theta_scaled = bundle.scalers['param'].transform(values)
    latents = rollout_latents(bundle, theta_scaled, n_t)
    _continuity_check(bundle, latents, values)

    field = decode_latents(bundle, latents)
    if not np.all(np.isfinite(field)):
        raise NumericalFailure(f"Prediction for θ={values.tolist()} is not finite")
    return SnapshotMatrix(field, bundle.times(n_t), ParameterVector.from_array(values, bundle.feature_names))


def encode_snapshot(bundle: RomBundle, snapshot: np.ndarray) -> np.ndarray:
    """(N_h, N_t) field -> (N_t, q) scaled latents through basis and encoder."""
    coords = project(bundle.basis, np.asarray(snapshot, dtype=np.float64)).T
    latents = bundle.cae.encode(bundle.scalers['coord'].transform(coords))
    return bundle.scalers['latent'].transform(latents)


def teacher_forced_latents(bundle: RomBundle, theta: ThetaLike,
                           snapshot: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    One-step LSTM predictions from true latent windows.

    Returns:
        (predicted, target) scaled latents for steps w .. N_t - 1, each (N_t - w, q)

    Raises:
        ConfigurationError: If the snapshot has no step after the first window
    """
    values = _theta_array(bundle, theta)
    theta_scaled = bundle.scalers['param'].transform(values)
    true = encode_snapshot(bundle, snapshot)
    w = bundle.window
    if true.shape[0] <= w:
        raise ConfigurationError(f"Need more than {w} time steps, got {true.shape[0]}")
    predicted = np.stack([lstm_step(bundle, true[i - w:i], theta_scaled)
                          for i in range(w, true.shape[0])])
    return predicted, true[w:]
