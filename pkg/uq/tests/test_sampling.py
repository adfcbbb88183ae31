"""
Tests for truncated Gaussian parameter sampling.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hfm.parameters import Feature, ParameterSpace
from uq.sampling import SamplingError, sample_feasible, sample_gaussian, sample_gaussian_array


@pytest.fixture
def space():
    return ParameterSpace((
        Feature('a', 10.0, 2.0),
        Feature('b', -1.0, 0.01),
        Feature('c', 0.0, 1.0, 'uniform'),
    ))


class TestSampleGaussian:
    """Tests for the per-feature draws."""

    def test_shape_and_bounds(self, space):
        draws = sample_gaussian_array(space, 5000, seed=0)
        assert draws.shape == (5000, 3)
        assert np.all(draws >= space.lower)
        assert np.all(draws <= space.upper)

    def test_mean_within_standard_error(self, space):
        r = 4000
        draws = sample_gaussian_array(space, r, seed=3)
        assert np.all(np.abs(draws[:, :2].mean(axis=0) - space.means[:2])
                      <= 4.0 * space.stds[:2] / np.sqrt(r))

    def test_uniform_feature_covers_box(self, space):
        column = sample_gaussian_array(space, 4000, seed=1)[:, 2]
        assert column.min() < -3.5
        assert column.max() > 3.5

    def test_same_seed_same_draws(self, space):
        np.testing.assert_array_equal(
            sample_gaussian_array(space, 10, seed=42),
            sample_gaussian_array(space, 10, seed=42),
        )

    def test_generator_is_advanced(self, space):
        rng = np.random.default_rng(0)
        first = sample_gaussian_array(space, 3, rng)
        second = sample_gaussian_array(space, 3, rng)
        assert not np.array_equal(first, second)

    def test_vectors_carry_names(self, space):
        vectors = sample_gaussian(space, 2, seed=0)
        assert len(vectors) == 2
        assert vectors[0].names == space.names

    def test_zero_count(self, space):
        with pytest.raises(SamplingError):
            sample_gaussian_array(space, 0)

    @settings(max_examples=25, deadline=None)
    @given(
        mean=st.floats(-1e3, 1e3, allow_nan=False),
        std=st.floats(1e-3, 1e2, allow_nan=False),
        seed=st.integers(0, 2**32 - 1),
    )
    def test_draws_never_leave_box(self, mean, std, seed):
        single = ParameterSpace((Feature('x', mean, std),))
        draws = sample_gaussian_array(single, 200, seed)
        assert np.all(draws >= single.lower[0])
        assert np.all(draws <= single.upper[0])


class TestSampleFeasible:
    """Tests for rejection against a feasibility predicate."""

    def test_rows_satisfy_predicate(self, space):
        rows = sample_feasible(space, 200, seed=0, feasible=lambda row: row[0] > 10.0)
        assert rows.shape == (200, 3)
        assert np.all(rows[:, 0] > 10.0)

    def test_no_predicate_matches_plain_draws(self, space):
        np.testing.assert_array_equal(
            sample_feasible(space, 5, seed=7),
            sample_gaussian_array(space, 5, seed=7),
        )

    def test_infeasible_space(self, space):
        with pytest.raises(SamplingError, match='feasible'):
            sample_feasible(space, 2, seed=0, feasible=lambda row: False)
