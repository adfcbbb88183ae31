"""
Temperature-corrected material properties and plate-wave speed.

Corrections (T in deg C):
    E^t = E - 0.0263 T      (GPa)
    nu^t = nu + 0.003 T
    rho^t = rho - 0.184 T   (kg/m^3)
"""

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from hfm.parameters import ParameterSpace, ParameterVector, REFERENCE_NAMES
from utils.errors import ConfigurationError

E_PER_DEGREE = -0.0263
NU_PER_DEGREE = 0.003
RHO_PER_DEGREE = -0.184

GPA = 1.0e9


class InvalidMaterialError(ConfigurationError):
    """Raised when corrected properties leave the physical range."""
    pass


@dataclass(frozen=True)
class EffectiveMaterial:
    """Temperature-corrected properties (E in GPa, rho in kg/m^3)."""
    E: float
    nu: float
    rho: float


def _as_vector(theta: Union[ParameterVector, Sequence[float]]) -> ParameterVector:
    if isinstance(theta, ParameterVector):
        return theta
    return ParameterVector.from_array(theta, REFERENCE_NAMES)


def derive_material(theta: Union[ParameterVector, Sequence[float]]) -> EffectiveMaterial:
    """
    Apply the linear temperature corrections to E, nu and rho.

    Args:
        theta: Parameter vector with features E, nu, rho, T

    Returns:
        EffectiveMaterial with the corrected properties

    Raises:
        InvalidMaterialError: If nu^t is outside (0, 0.5) or E^t, rho^t <= 0
    """
    theta = _as_vector(theta)
    try:
        E, nu, rho, T = theta['E'], theta['nu'], theta['rho'], theta['T']
    except KeyError as e:
        raise InvalidMaterialError(f"Parameter vector lacks a material feature: {e}") from None

    E_t = E + E_PER_DEGREE * T
    nu_t = nu + NU_PER_DEGREE * T
    rho_t = rho + RHO_PER_DEGREE * T

    if not 0.0 < nu_t < 0.5:
        raise InvalidMaterialError(f"Corrected Poisson ratio {nu_t:.6g} outside (0, 0.5) for θ={theta}")
    if E_t <= 0:
        raise InvalidMaterialError(f"Corrected Young modulus {E_t:.6g} GPa must be > 0 for θ={theta}")
    if rho_t <= 0:
        raise InvalidMaterialError(f"Corrected density {rho_t:.6g} must be > 0 for θ={theta}")

    return EffectiveMaterial(E=E_t, nu=nu_t, rho=rho_t)


def is_physical(theta: Union[ParameterVector, Sequence[float]]) -> bool:
    """True if derive_material succeeds for theta."""
    try:
        derive_material(theta)
    except InvalidMaterialError:
        return False
    return True


def wave_speed(material: EffectiveMaterial) -> float:
    """Plate-wave speed c = sqrt(E / (rho (1 - nu^2))) in m/s."""
    return math.sqrt(material.E * GPA / (material.rho * (1.0 - material.nu ** 2)))


def max_wave_speed(space: ParameterSpace) -> float:
    """
    Upper bound of the wave speed over the parameter box.

    Each corrected property is linear in the features, so its extreme sits
    on a box corner; nu^t is capped at 0.5.

    Raises:
        InvalidMaterialError: If the space lacks E, nu, rho, T or the bound is not positive
    """
    lo = dict(zip(space.names, space.lower))
    hi = dict(zip(space.names, space.upper))
    missing = [n for n in REFERENCE_NAMES if n not in lo]
    if missing:
        raise InvalidMaterialError(f"Parameter space lacks material features {missing}")

    # E^t grows as T falls, rho^t falls as T rises, nu^t rises with T
    T_for_E = lo['T'] if E_PER_DEGREE < 0 else hi['T']
    E_max = hi['E'] + E_PER_DEGREE * T_for_E
    rho_min = lo['rho'] + RHO_PER_DEGREE * (hi['T'] if RHO_PER_DEGREE < 0 else lo['T'])
    nu_max = min(hi['nu'] + NU_PER_DEGREE * hi['T'], 0.5)

    if E_max <= 0 or rho_min <= 0:
        raise InvalidMaterialError(
            f"Parameter box reaches non-physical material (E^t max {E_max}, rho^t min {rho_min})"
        )
    return float(np.sqrt(E_max * GPA / (rho_min * (1.0 - nu_max ** 2))))
