"""
Tests for per-figure plot-data tables.
"""

import numpy as np
import pandas as pd
import pytest

from reports.plot_data import (
    bo_error_curve,
    cpr_evolution,
    di_scatter,
    node_band,
    setup_error_evolution,
    sobol_bars,
    write_plot_data,
)
from reports.tables import ReportWriteError
from storage.array_store import load_metadata, sidecar_path


@pytest.fixture
def trace():
    # Iteration 0 holds the two initial-design rows
    return pd.DataFrame({
        'iteration': [0, 0, 1, 2],
        'n_training': [1, 2, 3, 4],
        'E': [68.0, 69.0, 70.0, 67.5],
        'test_error': [0.5, 0.2, 0.05, 0.01],
        'rank': [4, 8, 10, 10],
        'seconds': [np.nan] * 4,
    })


class TestNodeBand:
    """Tests for the mean ± std series."""

    def test_band(self):
        fields = pd.DataFrame({
            'node': [0, 0, 1, 1],
            't_index': [1, 0, 0, 1],
            'mean': [1.0, 0.0, 5.0, 6.0],
            'std': [0.5, 0.1, 1.0, 1.0],
        })
        band = node_band(fields, 0)
        assert list(band['t_index']) == [0, 1]
        np.testing.assert_allclose(band['lower'], [-0.1, 0.5])
        np.testing.assert_allclose(band['upper'], [0.1, 1.5])

    def test_missing_node(self):
        fields = pd.DataFrame({'node': [0], 't_index': [0], 'mean': [0.0], 'std': [0.0]})
        with pytest.raises(ReportWriteError, match='Node 3'):
            node_band(fields, 3)

    def test_missing_column(self):
        with pytest.raises(ReportWriteError, match='std'):
            node_band(pd.DataFrame({'node': [0], 't_index': [0], 'mean': [0.0]}), 0)


class TestSobolBars:
    """Tests for the bar-chart selection."""

    def test_selects_times(self):
        sobol = pd.DataFrame({
            'feature': ['a', 'a', 'b', 'b'],
            't_index': [0, 1, 0, 1],
            'S': [0.1, 0.2, 0.3, 0.4],
            'S_T': [0.1, 0.2, 0.3, 0.4],
        })
        bars = sobol_bars(sobol, [1])
        assert list(bars['feature']) == ['a', 'b']
        np.testing.assert_allclose(bars['S'], [0.2, 0.4])

    def test_absent_time(self):
        sobol = pd.DataFrame({'feature': ['a'], 't_index': [0], 'S': [0.1], 'S_T': [0.1]})
        with pytest.raises(ReportWriteError, match='Time indices'):
            sobol_bars(sobol, [5])


class TestTraceCurves:
    """Tests for the BO error and compression curves."""

    def test_error_curve(self, trace):
        curve = bo_error_curve(trace)
        assert list(curve['iteration']) == [0, 1, 2]
        assert list(curve['n_training']) == [2, 3, 4]
        np.testing.assert_allclose(curve['test_error'], [0.2, 0.05, 0.01])

    def test_cpr(self, trace):
        cpr = cpr_evolution(trace, 10)
        assert list(cpr['columns_seen']) == [20, 30, 40]
        np.testing.assert_allclose(cpr['cpr'], [8 / 20, 10 / 30, 10 / 40])
        assert cpr['cpr'].iloc[-1] < cpr['cpr'].iloc[0]

    def test_cpr_needs_times(self, trace):
        with pytest.raises(ReportWriteError):
            cpr_evolution(trace, 0)


class TestSetupErrorEvolution:
    """Tests for the per-setup max-error curves."""

    def test_aggregates_over_trials(self):
        evolution = pd.DataFrame({
            'setup': ['EI-rbf'] * 5 + ['PI-rbf'] * 2,
            'trial': [0, 0, 1, 1, 1, 0, 0],
            'iteration': [0, 1, 0, 1, 2, 0, 1],
            'n_training': [4, 5, 4, 5, 6, 4, 5],
            'test_error': [0.2, 0.1, 0.4, 0.2, 0.05, 0.3, 0.3],
            'max_test_error': [0.5, 0.3, 0.9, 0.5, 0.1, 0.6, 0.4],
        })

        curves = setup_error_evolution(evolution)

        assert list(curves['setup']) == ['EI-rbf', 'EI-rbf', 'EI-rbf', 'PI-rbf', 'PI-rbf']
        assert list(curves['trials']) == [2, 2, 1, 1, 1]
        np.testing.assert_allclose(curves['median_max_error'], [0.7, 0.4, 0.1, 0.6, 0.4])
        np.testing.assert_allclose(curves['min_max_error'], [0.5, 0.3, 0.1, 0.6, 0.4])
        np.testing.assert_allclose(curves['max_max_error'], [0.9, 0.5, 0.1, 0.6, 0.4])

    def test_needs_max_error(self):
        evolution = pd.DataFrame({'setup': ['EI-rbf'], 'trial': [0], 'iteration': [0],
                                  'test_error': [0.1]})
        with pytest.raises(ReportWriteError, match='max_test_error'):
            setup_error_evolution(evolution)


class TestWritePlotData:
    """Tests for writing the figure tables."""

    def test_di_scatter_drops_index(self):
        di = pd.DataFrame({'sample': [0, 1], 'E': [68.0, 70.0], 'DI': [1.0, 0.5]})
        assert list(di_scatter(di).columns) == ['E', 'DI']

    def test_writes_one_file_per_figure(self, tmp_path):
        tables = {
            'di_scatter': pd.DataFrame({'E': [68.0], 'DI': [1.0]}),
            'uq_band': pd.DataFrame({'t_index': [0], 'mean': [0.0]}),
        }
        written = write_plot_data(tmp_path, tables, {'config_hash': 'h'})
        assert sorted(written) == ['di_scatter', 'uq_band']
        meta = load_metadata(sidecar_path(written['uq_band']))
        assert meta['figure'] == 'uq_band'
        assert meta['config_hash'] == 'h'
