"""
Tone-burst excitation: a Hann-windowed sine with n_peaks carrier cycles.
"""

import numpy as np


def tone_burst(f_c: float, n_peaks: int, t):
    """
    Hann-windowed sine burst.

    s(t) = 0.5 (1 - cos(2π f_c t / n)) sin(2π f_c t) for 0 <= t <= n / f_c, else 0.

    Args:
        f_c: Central frequency (Hz), > 0
        n_peaks: Number of carrier cycles, >= 1
        t: Time (s), scalar or array

    Returns:
        Amplitude with the shape of t (float for scalar t)
    """
    if f_c <= 0:
        raise ValueError(f"Central frequency must be > 0, got {f_c}")
    if n_peaks < 1:
        raise ValueError(f"n_peaks must be >= 1, got {n_peaks}")

    t_arr = np.asarray(t, dtype=np.float64)
    duration = n_peaks / f_c
    phase = 2.0 * np.pi * f_c * t_arr
    envelope = 0.5 * (1.0 - np.cos(phase / n_peaks))
    values = np.where((t_arr >= 0.0) & (t_arr <= duration), envelope * np.sin(phase), 0.0)

    if values.ndim == 0:
        return float(values)
    return values
