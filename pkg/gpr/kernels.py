"""
Covariance kernels over parameter vectors.

All kernels take (n, d) and (m, d) arrays and return the (n, m) covariance
matrix; 1D inputs are read as a single point.
"""

import math

import numpy as np
from scipy.spatial.distance import cdist
from scipy.special import gamma, kv

SQRT3 = math.sqrt(3.0)


def _as_points(x) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 0:
        return arr.reshape(1, 1)
    if arr.ndim == 1:
        return arr[None, :]
    return arr


def kernel_rbf(x, y, length_scale: float, variance: float = 1.0,
               squared_length_scale: bool = False) -> np.ndarray:
    """
    Squared-exponential kernel variance * exp(-|x - y|^2 / (2 l)).

    With squared_length_scale the denominator is 2 l^2 instead.
    """
    if length_scale <= 0:
        raise ValueError(f"length_scale must be > 0, got {length_scale}")
    d2 = cdist(_as_points(x), _as_points(y), 'sqeuclidean')
    denom = 2.0 * length_scale ** 2 if squared_length_scale else 2.0 * length_scale
    return variance * np.exp(-d2 / denom)


def kernel_matern15(x, y, length_scale: float, variance: float = 1.0) -> np.ndarray:
    """Matérn kernel at smoothness 1.5: variance * (1 + √3 d/l) exp(-√3 d/l)."""
    if length_scale <= 0:
        raise ValueError(f"length_scale must be > 0, got {length_scale}")
    r = SQRT3 * cdist(_as_points(x), _as_points(y), 'euclidean') / length_scale
    return variance * (1.0 + r) * np.exp(-r)


def kernel_matern(x, y, length_scale: float, variance: float = 1.0, nu: float = 1.5) -> np.ndarray:
    """
    General Matérn kernel through the modified Bessel function K_nu.

    variance * 2^(1-nu) / Gamma(nu) * (√(2nu) d/l)^nu * K_nu(√(2nu) d/l),
    with the d = 0 limit equal to variance.
    """
    if length_scale <= 0 or nu <= 0:
        raise ValueError("length_scale and nu must be > 0")
    d = cdist(_as_points(x), _as_points(y), 'euclidean')
    scaled = math.sqrt(2.0 * nu) * d / length_scale
    out = np.full_like(scaled, variance)
    nz = scaled > 0
    s = scaled[nz]
    out[nz] = variance * (2.0 ** (1.0 - nu) / gamma(nu)) * s ** nu * kv(nu, s)
    return out


def kernel_product(x, y, rbf_length_scale: float, rbf_variance: float,
                   matern_length_scale: float, matern_variance: float,
                   squared_length_scale: bool = False) -> np.ndarray:
    """Pointwise product of the rbf and Matérn-1.5 kernels."""
    return (
        kernel_rbf(x, y, rbf_length_scale, rbf_variance, squared_length_scale)
        * kernel_matern15(x, y, matern_length_scale, matern_variance)
    )
