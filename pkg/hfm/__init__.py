"""
High-fidelity model (HFM) stand-in.

A 2D scalar-wave finite-difference plate excited by a tone burst. The
plate-wave speed depends on all four temperature-corrected material
features, so every parameter influences the snapshot matrices.
"""

from hfm.parameters import Feature, ParameterSpace, ParameterVector, ParameterError
from hfm.material import (
    EffectiveMaterial,
    InvalidMaterialError,
    derive_material,
    is_physical,
    max_wave_speed,
    wave_speed,
)
from hfm.excitation import tone_burst
from hfm.solver import (
    CFLViolationError,
    GridConfig,
    HfmConfigError,
    SimulationDivergenceError,
    SnapshotMatrix,
    SourceConfig,
    TimeConfig,
    simulate,
)
from hfm.snapshots import load_snapshot, save_snapshot, snapshot_metadata
