"""
Tests for the finite-difference plate solver.
Small grids keep every run well under a second.
"""

import numpy as np
import pytest

from hfm.parameters import ParameterSpace
from hfm.snapshots import load_snapshot, save_snapshot, snapshot_metadata
from hfm.solver import (
    CFLViolationError,
    GridConfig,
    HfmConfigError,
    SimulationDivergenceError,
    SnapshotMatrix,
    SourceConfig,
    TimeConfig,
    check_cfl,
    simulate,
)

THETA = [68.9, 0.33, 2700.0, 25.0]

SMALL_GRID = GridConfig(nx=16, ny=16, dx=2.0e-3)
SMALL_TIME = TimeConfig(dt=1.0e-7, steps=100, keep_every=5)

# Low carrier frequency + small dt keep time-discretization error tiny
SMOOTH_SOURCE = SourceConfig(center_frequency=100.0e3, n_peaks=2)


def _relative_frobenius(a: np.ndarray, b: np.ndarray) -> float:
    return np.linalg.norm(a - b) / np.linalg.norm(b)


class TestConfigs:
    """Tests for grid/time/source validation."""

    def test_grid_too_small(self):
        with pytest.raises(HfmConfigError, match='>= 8'):
            GridConfig(nx=4, ny=16)

    def test_bad_spacing(self):
        with pytest.raises(HfmConfigError):
            GridConfig(dx=0.0)

    def test_unknown_edge(self):
        with pytest.raises(HfmConfigError, match='Unknown fixed edges'):
            GridConfig(fixed_edges=('north',))

    def test_retained_count(self):
        time = TimeConfig(dt=1e-7, steps=1000, keep_every=5)
        assert time.n_retained == 200
        assert TimeConfig(dt=1e-7, steps=1003, keep_every=5).n_retained == 200

    def test_times(self):
        time = TimeConfig(dt=1e-7, steps=20, keep_every=5)
        np.testing.assert_allclose(time.times(), [0.0, 5e-7, 1e-6, 1.5e-6])

    def test_refined_keeps_times(self):
        time = TimeConfig(dt=1e-7, steps=20, keep_every=5)
        np.testing.assert_allclose(time.refined().times(), time.times())

    def test_source_default_center(self):
        assert SourceConfig().location(SMALL_GRID) == (8, 8)

    def test_source_on_clamped_edge(self):
        with pytest.raises(HfmConfigError, match='clamped'):
            SourceConfig(ix=0, iy=5).location(SMALL_GRID)

    def test_source_outside(self):
        with pytest.raises(HfmConfigError, match='outside'):
            SourceConfig(ix=40, iy=5).location(SMALL_GRID)

    def test_node_index(self):
        assert SMALL_GRID.node_index(3, 2) == 2 * 16 + 3


class TestSimulate:
    """Tests for simulate."""

    def test_shape(self):
        snap = simulate(THETA, SMALL_GRID, SMALL_TIME)

        assert snap.values.shape == (256, 20)
        assert snap.n_times == SMALL_TIME.n_retained
        np.testing.assert_allclose(snap.times, SMALL_TIME.times())
        assert np.all(np.isfinite(snap.values))

    def test_zero_amplitude_gives_zero_field(self):
        snap = simulate(THETA, SMALL_GRID, SMALL_TIME, SourceConfig(amplitude=0.0))
        assert not np.any(snap.values)

    def test_deterministic(self):
        a = simulate(THETA, SMALL_GRID, SMALL_TIME)
        b = simulate(THETA, SMALL_GRID, SMALL_TIME)
        assert np.array_equal(a.values, b.values)

    def test_linear_in_source_amplitude(self):
        base = simulate(THETA, SMALL_GRID, SMALL_TIME, SourceConfig(amplitude=1.0))
        doubled = simulate(THETA, SMALL_GRID, SMALL_TIME, SourceConfig(amplitude=4.0))
        scaled = simulate(THETA, SMALL_GRID, SMALL_TIME, SourceConfig(amplitude=-3.0))

        assert np.array_equal(doubled.values, 4.0 * base.values)
        assert _relative_frobenius(scaled.values, -3.0 * base.values) < 1e-12

    def test_clamped_edges_stay_zero(self):
        snap = simulate(THETA, SMALL_GRID, TimeConfig(dt=1e-7, steps=400, keep_every=4))
        field = snap.values.reshape(16, 16, -1)

        assert not np.any(field[:, 0, :])
        assert not np.any(field[0, :, :])
        assert np.any(field[:, -1, :])

    def test_every_feature_changes_the_field(self):
        base = simulate(THETA, SMALL_GRID, SMALL_TIME).values
        for index, delta in enumerate([2.0, 0.02, 10.0, 5.0]):
            theta = list(THETA)
            theta[index] += delta
            other = simulate(theta, SMALL_GRID, SMALL_TIME).values
            assert not np.allclose(base, other)

    def test_cfl_violation_rejected(self):
        with pytest.raises(CFLViolationError, match='CFL'):
            simulate(THETA, SMALL_GRID, TimeConfig(dt=1e-6, steps=10, keep_every=1))

    def test_cfl_bound(self):
        check_cfl(5000.0, SMALL_GRID, TimeConfig(dt=2.8e-7, steps=1, keep_every=1))
        with pytest.raises(CFLViolationError):
            check_cfl(5000.0, SMALL_GRID, TimeConfig(dt=2.9e-7, steps=1, keep_every=1))

    def test_divergence_reports_step(self, mocker):
        mocker.patch('hfm.solver.tone_burst', return_value=float('inf'))
        with pytest.raises(SimulationDivergenceError, match='step 0'):
            simulate(THETA, SMALL_GRID, SMALL_TIME)

    def test_halving_dt_converges(self):
        grid = GridConfig(nx=32, ny=32, dx=2.0e-3)
        time = TimeConfig(dt=5.0e-8, steps=400, keep_every=4)

        coarse = simulate(THETA, grid, time, SMOOTH_SOURCE)
        fine = simulate(THETA, grid, time.refined(), SMOOTH_SOURCE)

        assert _relative_frobenius(coarse.values, fine.values) < 0.01

    def test_energy_rises_then_stays_bounded(self):
        grid = GridConfig(nx=64, ny=64, dx=2.0e-3)
        time = TimeConfig(dt=5.0e-8, steps=800, keep_every=8)
        theta = ParameterSpace.reference().means

        snap = simulate(theta, grid, time, SMOOTH_SOURCE)
        energy = np.sum(snap.values ** 2, axis=0)

        burst_end = SMOOTH_SOURCE.n_peaks / SMOOTH_SOURCE.center_frequency
        during = snap.times <= burst_end
        assert energy[0] == 0.0
        assert energy[during].max() > 0.0
        assert energy[~during].max() <= 3.0 * energy[during].max()

        fine = simulate(theta, grid, time.refined(), SMOOTH_SOURCE)
        assert _relative_frobenius(snap.values, fine.values) < 0.01


class TestSnapshotFiles:
    """Tests for snapshot persistence."""

    def test_save_and_load(self, tmp_path):
        snap = simulate(THETA, SMALL_GRID, SMALL_TIME)
        meta = snapshot_metadata(snap, SMALL_GRID, SMALL_TIME, SourceConfig(), {'config_hash': 'h'})

        save_snapshot(tmp_path / 's.roms', snap, meta)
        loaded, sidecar = load_snapshot(tmp_path / 's.roms')

        assert np.array_equal(loaded.values, snap.values)
        np.testing.assert_allclose(loaded.times, snap.times)
        assert loaded.theta == snap.theta
        assert sidecar['grid.nx'] == '16'
        assert sidecar['config_hash'] == 'h'

    def test_snapshot_rejects_non_finite(self):
        with pytest.raises(Exception, match='non-finite'):
            SnapshotMatrix(values=np.array([[np.nan]]), times=np.array([0.0]))
