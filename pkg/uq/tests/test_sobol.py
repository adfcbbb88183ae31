"""
Tests for the Saltelli design and Sobol index estimators.
"""

import numpy as np
import pytest
from SALib.sample import sobol as sobol_sample

from hfm.parameters import Feature, ParameterSpace
from uq.sampling import SamplingError
from uq.sobol import (
    SaltelliEvaluations,
    SobolUndefinedError,
    SobolWarning,
    evaluate_design,
    _to_distribution,
    saltelli_sample,
    sobol_analysis,
    sobol_first,
    sobol_indices,
    sobol_total,
)
from uq.surrogates import IshigamiSurrogate
from utils.errors import NumericalFailure


@pytest.fixture
def space4():
    return ParameterSpace((
        Feature('E', 70.0, 3.5),
        Feature('nu', 0.33, 0.0165),
        Feature('rho', 2700.0, 135.0),
        Feature('T', 20.0, 5.0, 'uniform'),
    ))


@pytest.fixture
def pair():
    return ParameterSpace((Feature('x1', 0.0, 1.0, 'uniform'), Feature('x2', 0.0, 1.0, 'uniform')))


class Additive:
    def evaluate(self, theta):
        return np.array([theta[0] + theta[1]])


def additive_evaluations(design):
    return SaltelliEvaluations(design, design.points[:, 0] + design.points[:, 1])


class TestSaltelliSample:
    """Tests for the design layout."""

    def test_row_count(self, space4):
        design = saltelli_sample(space4, 1024, seed=0)
        assert design.points.shape == (10240, 4)
        assert design.n_base == 1024
        assert design.dim == 4

    def test_block_structure(self, space4):
        design = saltelli_sample(space4, 64, seed=1)
        A, B = design.A, design.B
        for i in range(4):
            others = [j for j in range(4) if j != i]
            np.testing.assert_array_equal(design.AB(i)[:, i], B[:, i])
            np.testing.assert_array_equal(design.AB(i)[:, others], A[:, others])
            np.testing.assert_array_equal(design.BA(i)[:, i], A[:, i])
            np.testing.assert_array_equal(design.BA(i)[:, others], B[:, others])

    def test_points_inside_bounds(self, space4):
        points = saltelli_sample(space4, 256, seed=2).points
        assert np.all(points >= space4.lower)
        assert np.all(points <= space4.upper)

    def test_normal_marginals(self, space4):
        A = saltelli_sample(space4, 4096, seed=3).A
        np.testing.assert_allclose(A[:, 0].mean(), 70.0, atol=0.2)
        np.testing.assert_allclose(A[:, 0].std(), 3.5, rtol=0.05)

    def test_deterministic(self, space4):
        np.testing.assert_array_equal(
            saltelli_sample(space4, 32, seed=9).points,
            saltelli_sample(space4, 32, seed=9).points,
        )

    def test_regroups_salib_rows(self, space4):
        problem = {'num_vars': 4, 'names': ['a', 'b', 'c', 'd'], 'bounds': [[0.0, 1.0]] * 4}
        rows = sobol_sample.sample(problem, 16, calc_second_order=True, scramble=True,
                                   seed=np.random.default_rng(11))
        design = saltelli_sample(space4, 16, seed=11)
        np.testing.assert_array_equal(design.A, _to_distribution(space4, rows[0::10]))
        np.testing.assert_array_equal(design.AB(2), _to_distribution(space4, rows[3::10]))
        np.testing.assert_array_equal(design.BA(0), _to_distribution(space4, rows[5::10]))
        np.testing.assert_array_equal(design.B, _to_distribution(space4, rows[9::10]))

    @pytest.mark.parametrize('n_base', [0, 1000, 96])
    def test_sobol_needs_power_of_two(self, space4, n_base):
        with pytest.raises(SamplingError):
            saltelli_sample(space4, n_base)

    def test_random_method_accepts_any_size(self, space4):
        assert saltelli_sample(space4, 1000, seed=0, method='random').points.shape == (10000, 4)

    def test_unknown_method(self, space4):
        with pytest.raises(SamplingError, match='method'):
            saltelli_sample(space4, 64, method='halton')


class TestSobolIndices:
    """Tests for the first-order and total estimators."""

    def test_ishigami(self):
        model = IshigamiSurrogate()
        design = saltelli_sample(model.space(), 8192, seed=0)
        result = sobol_analysis(evaluate_design(model, design), num_resamples=20)
        first, total = model.analytic_indices()
        np.testing.assert_allclose(result.first[:, 0], first, atol=0.03)
        np.testing.assert_allclose(result.total[:, 0], total, atol=0.03)
        assert np.all(result.first_conf > 0.0)

    def test_additive_model(self, pair):
        evaluations = additive_evaluations(saltelli_sample(pair, 1024, seed=4))
        result = sobol_analysis(evaluations, num_resamples=20)
        np.testing.assert_allclose(result.first[:, 0], [0.5, 0.5], atol=0.05)
        np.testing.assert_allclose(result.total[:, 0], result.first[:, 0], atol=0.05)

    def test_single_index_matches_analysis(self, pair):
        evaluations = additive_evaluations(saltelli_sample(pair, 512, seed=5))
        result = sobol_analysis(evaluations, num_resamples=10)
        first = sobol_first(evaluations, feature=1, num_resamples=10)
        total = sobol_total(evaluations, feature=0, num_resamples=10)
        assert first.value == pytest.approx(result.first[1, 0], rel=1e-10)
        assert total.value == pytest.approx(result.total[0, 0], rel=1e-10)
        assert first.low < first.value < first.high

    def test_zero_variance_raises(self, pair):
        design = saltelli_sample(pair, 64, seed=0)
        constant = SaltelliEvaluations(design, np.full(design.points.shape[0], 3.0))
        with pytest.raises(SobolUndefinedError):
            sobol_first(constant, feature=0)
        with pytest.raises(SobolUndefinedError):
            sobol_total(constant, feature=0)

    def test_zero_variance_column_is_nan(self, pair):
        design = saltelli_sample(pair, 256, seed=6)
        outputs = np.column_stack([design.points.sum(axis=1), np.ones(design.points.shape[0])])
        with pytest.warns(SobolWarning):
            result = sobol_analysis(SaltelliEvaluations(design, outputs), num_resamples=10)
        assert np.all(np.isnan(result.first[:, 1]))
        assert np.all(np.isnan(result.total_conf[:, 1]))
        assert np.all(np.isfinite(result.first[:, 0]))

    def test_feature_out_of_range(self, pair):
        evaluations = additive_evaluations(saltelli_sample(pair, 64, seed=0))
        with pytest.raises(SamplingError):
            sobol_first(evaluations, feature=2)

    def test_output_count_must_match_design(self, pair):
        design = saltelli_sample(pair, 64, seed=0)
        with pytest.raises(NumericalFailure):
            SaltelliEvaluations(design, np.zeros(10))


class TestSobolResult:
    """Tests for the assembled result."""

    def test_frame(self, pair):
        design = saltelli_sample(pair, 128, seed=7)
        outputs = np.column_stack([design.points[:, 0], design.points.sum(axis=1), design.points[:, 1]])
        result = sobol_analysis(SaltelliEvaluations(design, outputs), num_resamples=10)
        frame = result.to_frame(times=[0.0, 0.5, 1.0])
        assert list(frame.columns) == [
            'feature', 't_index', 'time', 'S', 'S_T',
            'CI_low', 'CI_high', 'ST_CI_low', 'ST_CI_high',
        ]
        assert len(frame) == 6
        row = frame[(frame['feature'] == 'x2') & (frame['t_index'] == 2)].iloc[0]
        assert row['S'] == pytest.approx(result.first[1, 2])
        assert row['CI_high'] - row['CI_low'] == pytest.approx(2.0 * result.first_conf[1, 2])

    def test_end_to_end(self, pair):
        result = sobol_indices(Additive(), pair, 128, seed=3, jobs=2, num_resamples=10)
        assert result.first.shape == (2, 1)
        assert result.estimator == 'saltelli2010/jansen'
        assert result.names == ('x1', 'x2')
