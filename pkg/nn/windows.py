"""
Sliding-window samples for the latent-dynamics LSTM.
"""

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from nn.layers import NetworkConfigError


@dataclass(frozen=True)
class SlidingWindowDataset:
    """
    inputs: (samples, w, q + xi); column block [z(t_a) .. z(t_{a+w-1})] with θ appended
    targets: (samples, q) latent at t_{a+w}
    groups: (samples,) index of the training parameter each sample came from
    """
    inputs: np.ndarray
    targets: np.ndarray
    groups: np.ndarray
    window: int

    def __len__(self) -> int:
        return self.inputs.shape[0]


def window_inputs(latents: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """Append θ to every latent row: (steps, q) -> (steps, q + xi)."""
    latents = np.atleast_2d(latents)
    theta = np.asarray(theta, dtype=np.float64).ravel()
    return np.hstack([latents, np.broadcast_to(theta, (latents.shape[0], theta.shape[0]))])


def build_sliding_windows(latents: np.ndarray, theta: np.ndarray, window: int,
                          group: int = 0) -> SlidingWindowDataset:
    """
    g = N_t - w samples from one latent trajectory.

    Args:
        latents: (N_t, q) latent vectors in time order
        theta: (xi,) parameter vector of the trajectory
        window: Window length w
        group: Identifier stored with every sample

    Raises:
        NetworkConfigError: If N_t <= w or w < 1
    """
    latents = np.asarray(latents, dtype=np.float64)
    n_t = latents.shape[0]
    if window < 1:
        raise NetworkConfigError(f"Window must be >= 1, got {window}")
    if n_t <= window:
        raise NetworkConfigError(f"Need more than {window} time steps for windowing, got {n_t}")

    rows = window_inputs(latents, theta)
    g = n_t - window
    inputs = np.stack([rows[a:a + window] for a in range(g)])
    targets = latents[window:window + g].copy()
    return SlidingWindowDataset(inputs, targets, np.full(g, group, dtype=np.int64), window)


def merge_windows(datasets: Sequence[SlidingWindowDataset]) -> SlidingWindowDataset:
    if not datasets:
        raise NetworkConfigError("No window datasets to merge")
    windows = {d.window for d in datasets}
    if len(windows) != 1:
        raise NetworkConfigError(f"Window lengths differ: {sorted(windows)}")
    return SlidingWindowDataset(
        np.concatenate([d.inputs for d in datasets]),
        np.concatenate([d.targets for d in datasets]),
        np.concatenate([d.groups for d in datasets]),
        windows.pop(),
    )
