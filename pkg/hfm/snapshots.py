"""
Snapshot matrix persistence in the shared array format.
The sidecar records θ, grid, time and source configuration as key=value lines.
"""

from pathlib import Path
from typing import Dict, Mapping, Optional, Tuple

import numpy as np

from hfm.parameters import ParameterVector
from hfm.solver import GridConfig, SnapshotMatrix, SourceConfig, TimeConfig
from storage.array_store import ArrayFormatError, MetaValue, load_array_with_meta, save_array


def snapshot_metadata(
    snapshot: SnapshotMatrix,
    grid: Optional[GridConfig] = None,
    time: Optional[TimeConfig] = None,
    source: Optional[SourceConfig] = None,
    extra: Optional[Mapping[str, MetaValue]] = None,
) -> Dict[str, MetaValue]:
    """Flatten θ and the solver configuration into sidecar entries."""
    meta: Dict[str, MetaValue] = {
        'kind': 'snapshot',
        'n_nodes': snapshot.n_nodes,
        'n_times': snapshot.n_times,
    }
    if snapshot.n_times > 0:
        meta['time.t0'] = float(snapshot.times[0])
    if snapshot.n_times > 1:
        meta['time.step'] = float(snapshot.times[1] - snapshot.times[0])
    if snapshot.theta is not None:
        meta['theta.names'] = ','.join(snapshot.theta.names)
        for name, value in snapshot.theta.as_dict().items():
            meta[f'theta.{name}'] = float(value)
    if grid is not None:
        meta.update({
            'grid.nx': grid.nx, 'grid.ny': grid.ny, 'grid.dx': float(grid.dx),
            'grid.thickness': float(grid.thickness),
            'grid.fixed_edges': ','.join(grid.fixed_edges),
        })
    if time is not None:
        meta.update({
            'time.dt': float(time.dt), 'time.steps': time.steps,
            'time.keep_every': time.keep_every,
        })
    if source is not None:
        meta.update({
            'source.ix': '' if source.ix is None else source.ix,
            'source.iy': '' if source.iy is None else source.iy,
            'source.amplitude': float(source.amplitude),
            'source.center_frequency': float(source.center_frequency),
            'source.n_peaks': source.n_peaks,
        })
    if extra:
        meta.update(extra)
    return meta


def save_snapshot(path: Path, snapshot: SnapshotMatrix, meta: Mapping[str, MetaValue]) -> Dict[str, object]:
    """Write a snapshot matrix and its sidecar."""
    return save_array(path, snapshot.values, meta)


def theta_from_metadata(meta: Mapping[str, str]) -> Optional[ParameterVector]:
    """Rebuild θ from 'theta.*' sidecar entries, if present."""
    if 'theta.names' not in meta:
        return None
    names = tuple(meta['theta.names'].split(','))
    try:
        values = tuple(float(meta[f'theta.{n}']) for n in names)
    except KeyError as e:
        raise ArrayFormatError(f"Sidecar lacks θ entry {e}") from None
    return ParameterVector(values, names)


def load_snapshot(path: Path) -> Tuple[SnapshotMatrix, Dict[str, str]]:
    """
    Read a snapshot matrix and its sidecar.

    Returns:
        (SnapshotMatrix, raw sidecar dictionary)
    """
    values, meta = load_array_with_meta(path)
    n_times = values.shape[1]
    t0 = float(meta.get('time.t0', 0.0))
    step = float(meta.get('time.step', 1.0))
    times = t0 + step * np.arange(n_times)
    return SnapshotMatrix(values=values, times=times, theta=theta_from_metadata(meta)), meta
