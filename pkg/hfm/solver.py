"""
Explicit finite-difference solver for the 2D scalar wave equation.

    u_tt = c^2 (u_xx + u_yy) + f(t) δ(x - x_s)

with c^2 = E^t / (rho^t (1 - nu^t^2)). Two adjacent plate edges are
clamped (u = 0); the remaining edges are traction free (zero normal
derivative). The retained field is the second central time difference of
u, an acceleration surrogate.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from hfm.excitation import tone_burst
from hfm.material import derive_material, wave_speed
from hfm.parameters import ParameterVector, REFERENCE_NAMES
from utils.errors import ConfigurationError, NumericalFailure

logger = logging.getLogger(__name__)

EDGES = ('left', 'right', 'bottom', 'top')


class HfmConfigError(ConfigurationError):
    """Raised when grid, time or source configuration is invalid."""
    pass


class CFLViolationError(HfmConfigError):
    """Raised when dt exceeds the explicit stability bound."""
    pass


class SimulationDivergenceError(NumericalFailure):
    """Raised when the field becomes non-finite."""
    pass


@dataclass(frozen=True)
class GridConfig:
    """Uniform plate grid; the field is stored as (ny, nx), node index iy*nx + ix."""
    nx: int = 64
    ny: int = 64
    dx: float = 2.0e-3
    thickness: float = 2.0e-3
    fixed_edges: Tuple[str, ...] = ('left', 'bottom')

    def __post_init__(self):
        if self.nx < 8 or self.ny < 8:
            raise HfmConfigError(f"Grid needs nx, ny >= 8, got {self.nx}x{self.ny}")
        if not self.dx > 0:
            raise HfmConfigError(f"Grid spacing must be > 0, got {self.dx}")
        if not self.thickness > 0:
            raise HfmConfigError(f"Plate thickness must be > 0, got {self.thickness}")
        edges = tuple(self.fixed_edges)
        unknown = [e for e in edges if e not in EDGES]
        if unknown:
            raise HfmConfigError(f"Unknown fixed edges {unknown}; valid: {EDGES}")
        object.__setattr__(self, 'fixed_edges', edges)

    @property
    def n_nodes(self) -> int:
        return self.nx * self.ny

    def fixed_mask(self) -> np.ndarray:
        """Boolean (ny, nx) mask of clamped nodes."""
        mask = np.zeros((self.ny, self.nx), dtype=bool)
        if 'left' in self.fixed_edges:
            mask[:, 0] = True
        if 'right' in self.fixed_edges:
            mask[:, -1] = True
        if 'bottom' in self.fixed_edges:
            mask[0, :] = True
        if 'top' in self.fixed_edges:
            mask[-1, :] = True
        return mask

    def node_index(self, ix: int, iy: int) -> int:
        """Flat node index of grid point (ix, iy)."""
        if not (0 <= ix < self.nx and 0 <= iy < self.ny):
            raise HfmConfigError(f"Node ({ix}, {iy}) outside {self.nx}x{self.ny} grid")
        return iy * self.nx + ix


@dataclass(frozen=True)
class TimeConfig:
    """Time window: `steps` solver steps of size dt, every k-th one retained."""
    dt: float = 1.0e-7
    steps: int = 1000
    keep_every: int = 5

    def __post_init__(self):
        if not self.dt > 0:
            raise HfmConfigError(f"dt must be > 0, got {self.dt}")
        if self.steps < 1:
            raise HfmConfigError(f"steps must be >= 1, got {self.steps}")
        if self.keep_every < 1:
            raise HfmConfigError(f"keep_every must be >= 1, got {self.keep_every}")
        if self.steps // self.keep_every < 1:
            raise HfmConfigError(
                f"No retained steps: steps={self.steps} < keep_every={self.keep_every}"
            )

    @property
    def n_retained(self) -> int:
        return self.steps // self.keep_every

    @property
    def duration(self) -> float:
        return self.steps * self.dt

    def times(self) -> np.ndarray:
        """Time stamps t_i = i * keep_every * dt of the retained columns."""
        return np.arange(self.n_retained) * self.keep_every * self.dt

    def refined(self) -> 'TimeConfig':
        """Same window and retained times with dt halved."""
        return TimeConfig(dt=self.dt / 2.0, steps=self.steps * 2, keep_every=self.keep_every * 2)


@dataclass(frozen=True)
class SourceConfig:
    """Point tone-burst source; defaults to the plate centre."""
    ix: Optional[int] = None
    iy: Optional[int] = None
    amplitude: float = 1.0
    center_frequency: float = 250.0e3
    n_peaks: int = 5

    def __post_init__(self):
        if not math.isfinite(self.amplitude):
            raise HfmConfigError(f"Source amplitude must be finite, got {self.amplitude}")
        if not self.center_frequency > 0:
            raise HfmConfigError(f"Center frequency must be > 0, got {self.center_frequency}")
        if self.n_peaks < 1:
            raise HfmConfigError(f"n_peaks must be >= 1, got {self.n_peaks}")

    def location(self, grid: GridConfig) -> Tuple[int, int]:
        """Resolve (ix, iy) on the grid, rejecting clamped or outside nodes."""
        ix = grid.nx // 2 if self.ix is None else self.ix
        iy = grid.ny // 2 if self.iy is None else self.iy
        if not (0 <= ix < grid.nx and 0 <= iy < grid.ny):
            raise HfmConfigError(f"Source ({ix}, {iy}) outside {grid.nx}x{grid.ny} grid")
        if grid.fixed_mask()[iy, ix]:
            raise HfmConfigError(f"Source ({ix}, {iy}) lies on a clamped edge")
        return ix, iy

    def scaled(self, factor: float) -> 'SourceConfig':
        return SourceConfig(self.ix, self.iy, self.amplitude * factor,
                            self.center_frequency, self.n_peaks)


@dataclass(frozen=True)
class SnapshotMatrix:
    """N_h x N_t field samples; column i is the field at times[i]."""
    values: np.ndarray
    times: np.ndarray
    theta: Optional[ParameterVector] = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        times = np.asarray(self.times, dtype=np.float64).ravel()
        if values.ndim != 2:
            raise NumericalFailure(f"Snapshot matrix must be 2D, got shape {values.shape}")
        if values.shape[1] != times.shape[0]:
            raise NumericalFailure(
                f"Snapshot has {values.shape[1]} columns but {times.shape[0]} time stamps"
            )
        if not np.all(np.isfinite(values)):
            raise NumericalFailure("Snapshot matrix has non-finite entries")
        object.__setattr__(self, 'values', values)
        object.__setattr__(self, 'times', times)

    @property
    def n_nodes(self) -> int:
        return self.values.shape[0]

    @property
    def n_times(self) -> int:
        return self.values.shape[1]


def check_cfl(c: float, grid: GridConfig, time: TimeConfig) -> None:
    """
    Enforce dt <= dx / (c sqrt(2)).

    Raises:
        CFLViolationError: If the bound is violated
    """
    limit = grid.dx / (c * math.sqrt(2.0))
    if time.dt > limit:
        raise CFLViolationError(
            f"dt={time.dt:.3e} s exceeds CFL limit {limit:.3e} s "
            f"(c={c:.1f} m/s, dx={grid.dx:.3e} m)"
        )


def _laplacian(u: np.ndarray, inv_dx2: float) -> np.ndarray:
    # Edge padding mirrors the boundary value: zero normal derivative
    up = np.pad(u, 1, mode='edge')
    return (up[1:-1, 2:] + up[1:-1, :-2] + up[2:, 1:-1] + up[:-2, 1:-1] - 4.0 * u) * inv_dx2


def simulate(
    theta: Union[ParameterVector, Sequence[float]],
    grid: GridConfig = GridConfig(),
    time: TimeConfig = TimeConfig(),
    source: SourceConfig = SourceConfig(),
) -> SnapshotMatrix:
    """
    Run the plate simulation for one parameter vector.

    Args:
        theta: Parameter vector [E, nu, rho, T]
        grid: Grid configuration
        time: Time-stepping configuration
        source: Tone-burst source configuration

    Returns:
        SnapshotMatrix with grid.n_nodes rows and time.n_retained columns

    Raises:
        InvalidMaterialError: If corrected properties are non-physical
        CFLViolationError: If dt violates the stability bound (before any step)
        SimulationDivergenceError: If the field becomes non-finite
    """
    if not isinstance(theta, ParameterVector):
        theta = ParameterVector.from_array(theta, REFERENCE_NAMES)

    material = derive_material(theta)
    c = wave_speed(material)
    check_cfl(c, grid, time)
    ix, iy = source.location(grid)

    dt = time.dt
    c2 = c * c
    inv_dx2 = 1.0 / (grid.dx * grid.dx)
    inv_dt2 = 1.0 / (dt * dt)
    # Point force spread over one cell of the plate: force / (rho h dx^2)
    force_scale = source.amplitude / (material.rho * grid.thickness * grid.dx * grid.dx)
    fixed = grid.fixed_mask()

    n_keep = time.n_retained
    snapshots = np.empty((grid.n_nodes, n_keep), dtype=np.float64)

    u_prev = np.zeros((grid.ny, grid.nx))
    u = np.zeros((grid.ny, grid.nx))

    logger.debug(f"Simulating θ={theta}: c={c:.1f} m/s, {time.steps} steps, keep {n_keep}")

    for n in range(n_keep * time.keep_every):
        t = n * dt
        accel = c2 * _laplacian(u, inv_dx2)
        accel[iy, ix] += force_scale * tone_burst(source.center_frequency, source.n_peaks, t)

        u_next = 2.0 * u - u_prev + (dt * dt) * accel
        u_next[fixed] = 0.0

        if not np.all(np.isfinite(u_next)):
            raise SimulationDivergenceError(f"Non-finite field at step {n} for θ={theta}")

        if n % time.keep_every == 0:
            snapshots[:, n // time.keep_every] = ((u_next - 2.0 * u + u_prev) * inv_dt2).ravel()

        u_prev, u = u, u_next

    return SnapshotMatrix(values=snapshots, times=time.times(), theta=theta)
