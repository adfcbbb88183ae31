"""
Tests for projection, reconstruction and the error estimators.
"""

import numpy as np
import pytest

from hfm.parameters import ParameterVector
from reduce.projection import (
    LabeledDataset,
    UndefinedErrorMeasure,
    mean_test_error,
    project,
    reconstruct,
    reconstruction_error,
)
from reduce.svd_update import DimensionError


@pytest.fixture
def basis():
    U, _ = np.linalg.qr(np.random.default_rng(0).standard_normal((20, 3)))
    return U


class TestProjection:
    """Tests for project/reconstruct."""

    def test_basis_projects_to_identity(self, basis):
        np.testing.assert_allclose(project(basis, basis), np.eye(3), atol=1e-12)

    def test_round_trip_in_span(self, basis):
        S = basis @ np.random.default_rng(1).standard_normal((3, 7))
        np.testing.assert_allclose(reconstruct(basis, project(basis, S)), S, atol=1e-10)

    def test_projection_contracts(self, basis):
        S = np.random.default_rng(2).standard_normal((20, 7))
        residual = S - reconstruct(basis, project(basis, S))
        assert np.linalg.norm(residual) <= np.linalg.norm(S)

    def test_dimension_mismatch(self, basis):
        with pytest.raises(DimensionError):
            project(basis, np.ones((19, 2)))
        with pytest.raises(DimensionError):
            reconstruct(basis, np.ones((4, 2)))


class TestReconstructionError:
    """Tests for the relative l2 error."""

    def test_in_span_is_zero(self, basis):
        S = basis @ np.ones((3, 4))
        assert reconstruction_error(S, basis) < 1e-12

    def test_orthogonal_is_one(self):
        U = np.eye(6)[:, :2]
        S = np.eye(6)[:, 3:5]
        assert reconstruction_error(S, U) == pytest.approx(1.0)

    def test_matches_dense_formula(self, basis):
        S = np.random.default_rng(3).standard_normal((20, 10))
        expected = np.linalg.norm(S - basis @ basis.T @ S, 'fro') / np.linalg.norm(S, 'fro')
        assert abs(reconstruction_error(S, basis) - expected) < 1e-12

    def test_scale_invariant(self, basis):
        S = np.random.default_rng(4).standard_normal((20, 5))
        assert reconstruction_error(1e6 * S, basis) == pytest.approx(reconstruction_error(S, basis), rel=1e-12)

    def test_rank_zero_basis(self):
        assert reconstruction_error(np.ones((5, 2)), np.zeros((5, 0))) == 1.0

    def test_zero_field(self, basis):
        with pytest.raises(UndefinedErrorMeasure):
            reconstruction_error(np.zeros((20, 3)), basis)


class TestMeanTestError:
    """Tests for the averaged test-set error."""

    def test_single_in_span(self, basis):
        assert mean_test_error([basis @ np.ones((3, 2))], basis) < 1e-12

    def test_average_of_zero_and_one(self):
        U = np.eye(4)[:, :1]
        tests = [np.eye(4)[:, :1], np.eye(4)[:, 2:3]]
        assert mean_test_error(tests, U) == pytest.approx(0.5)

    def test_empty_test_set(self, basis):
        with pytest.raises(UndefinedErrorMeasure):
            mean_test_error([], basis)

    def test_non_increasing_when_range_grows(self):
        rng = np.random.default_rng(5)
        full, _ = np.linalg.qr(rng.standard_normal((30, 8)))
        tests = [rng.standard_normal((30, 4)) for _ in range(3)]

        errors = [mean_test_error(tests, full[:, :k]) for k in range(1, 9)]

        assert all(b <= a + 1e-12 for a, b in zip(errors, errors[1:]))


class TestLabeledDataset:
    """Tests for the labeled dataset container."""

    def test_add_and_relabel(self):
        data = LabeledDataset()
        theta = ParameterVector((1.0,), ('x',))
        S = np.eye(4)[:, :2]
        data.add(theta, 1.0)

        data.relabel([S], np.eye(4)[:, :2])

        assert data.errors == [pytest.approx(0.0)]
        assert data.inputs().shape == (1, 1)

    def test_rejects_out_of_range_error(self):
        with pytest.raises(UndefinedErrorMeasure):
            LabeledDataset().add(ParameterVector((1.0,), ('x',)), 1.2)

    def test_relabel_count_mismatch(self):
        data = LabeledDataset()
        data.add(ParameterVector((1.0,), ('x',)), 0.5)
        with pytest.raises(DimensionError):
            data.relabel([], np.eye(3))
