"""
Tests for the streaming truncated SVD and basis padding.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reduce.projection import reconstruction_error
from reduce.svd_update import (
    BasisConfigError,
    DimensionError,
    ReducedBasis,
    build_basis,
    compression_ratio,
    direct_truncated_basis,
    load_basis,
    padded_rank,
    save_basis,
    split_columns,
    svd_update,
    truncate,
    update_with_snapshot,
    zero_pad_basis,
)


def low_rank_matrix(rng, n_rows, n_cols, singular_values, noise=0.0):
    left, _ = np.linalg.qr(rng.standard_normal((n_rows, len(singular_values))))
    right, _ = np.linalg.qr(rng.standard_normal((n_cols, len(singular_values))))
    S = left @ np.diag(singular_values) @ right.T
    return S + noise * rng.standard_normal((n_rows, n_cols))


class TestTruncate:
    """Tests for the relative-energy truncation rule."""

    def test_single_dominant_value(self):
        assert truncate(np.array([1.0, 0.0, 0.0]), 1e-3) == 1

    def test_equal_values_need_both(self):
        # Tail at rank 1 is sqrt(1/2) > 0.5
        assert truncate(np.array([1.0, 1.0]), 0.5) == 2

    def test_loose_tolerance_drops_equal_value(self):
        assert truncate(np.array([1.0, 1.0]), 0.75) == 1

    def test_all_zero_spectrum(self):
        assert truncate(np.zeros(4), 0.1) == 0
        assert truncate(np.zeros(0), 0.1) == 0

    def test_discarded_energy_counts_in_both_terms(self):
        # Discarded energy 0.01 of total 1.01 alone exceeds eps^2 = 0.0081
        assert truncate(np.array([1.0]), 0.09, discarded_energy=0.01) == 1
        assert truncate(np.array([1.0, 0.05]), 0.09, discarded_energy=0.01) == 2

    @pytest.mark.parametrize('eps', [0.0, 1.0, -0.1])
    def test_rejects_bad_tolerance(self, eps):
        with pytest.raises(BasisConfigError):
            truncate(np.array([1.0]), eps)


class TestSvdUpdate:
    """Tests for incremental updates against direct SVD."""

    def test_rank_one_batch(self):
        rng = np.random.default_rng(0)
        a = rng.standard_normal(12)
        b = rng.standard_normal(5)
        S = np.outer(a, b)

        basis = svd_update(ReducedBasis.empty(1e-6), S)

        assert basis.rank == 1
        assert basis.columns_seen == 5
        assert reconstruction_error(S, basis.U) < 1e-12

    def test_matches_direct_svd_without_truncation(self):
        rng = np.random.default_rng(1)
        S = rng.standard_normal((10, 8))

        basis = ReducedBasis.empty(1e-10)
        for block in split_columns(S, 4):
            basis = svd_update(basis, block)
        direct = direct_truncated_basis(S, 1e-10)

        assert basis.rank == direct.rank == 8
        assert abs(reconstruction_error(S, basis.U) - reconstruction_error(S, direct.U)) < 1e-8
        np.testing.assert_allclose(basis.singular_values, direct.singular_values, rtol=1e-10)

    @pytest.mark.parametrize('seed', [0, 1, 2, 3, 4])
    def test_truncated_error_close_to_direct(self, seed):
        rng = np.random.default_rng(seed)
        S = low_rank_matrix(rng, 40, 30, [10.0, 5.0, 2.0], noise=1e-3)

        incremental = update_with_snapshot(ReducedBasis.empty(1e-2), S, n_batches=6)
        direct = direct_truncated_basis(S, 1e-2)

        err_inc = reconstruction_error(S, incremental.U)
        err_dir = reconstruction_error(S, direct.U)
        assert err_inc <= 1.5 * err_dir + 1e-12
        assert err_inc <= 1e-2

    def test_zero_batch_leaves_basis_unchanged(self):
        rng = np.random.default_rng(2)
        basis = svd_update(ReducedBasis.empty(1e-6), rng.standard_normal((6, 3)))

        updated = svd_update(basis, np.zeros((6, 2)))

        np.testing.assert_array_equal(updated.U, basis.U)
        np.testing.assert_array_equal(updated.singular_values, basis.singular_values)
        assert updated.columns_seen == basis.columns_seen + 2

    def test_zero_batch_on_empty_basis(self):
        basis = svd_update(ReducedBasis.empty(1e-3), np.zeros((4, 2)))
        assert basis.is_empty
        assert basis.rank == 0
        assert basis.columns_seen == 2

    def test_batch_in_existing_range(self):
        rng = np.random.default_rng(3)
        S = low_rank_matrix(rng, 15, 6, [3.0, 1.0])
        basis = svd_update(ReducedBasis.empty(1e-8), S)

        updated = svd_update(basis, S[:, :2] * 2.0)

        assert updated.rank == 2
        assert reconstruction_error(S, updated.U) < 1e-10

    def test_orthonormal_after_many_updates(self):
        rng = np.random.default_rng(4)
        basis = ReducedBasis.empty(1e-8)
        for _ in range(30):
            basis = svd_update(basis, rng.standard_normal((50, 1)))

        gram = basis.U.T @ basis.U
        assert np.max(np.abs(gram - np.eye(basis.rank))) < 1e-10
        assert np.all(basis.singular_values >= 0)
        assert np.all(np.diff(basis.singular_values) <= 0)

    def test_row_mismatch(self):
        basis = svd_update(ReducedBasis.empty(1e-3), np.ones((5, 1)))
        with pytest.raises(DimensionError, match='rows'):
            svd_update(basis, np.ones((6, 1)))

    def test_build_basis_streams_every_matrix(self):
        rng = np.random.default_rng(5)
        mats = [rng.standard_normal((20, 8)) for _ in range(3)]

        basis = build_basis(mats, 1e-10, n_batches=4)

        assert basis.columns_seen == 24
        assert basis.rank == 20


class TestBasisHelpers:
    """Tests for compression ratio, padding and persistence."""

    def test_compression_ratio(self):
        U, _ = np.linalg.qr(np.random.default_rng(0).standard_normal((10, 3)))
        basis = ReducedBasis(U, np.array([3.0, 2.0, 1.0]), 1e-3, columns_seen=100)
        assert compression_ratio(basis) == pytest.approx(0.03)

    def test_compression_ratio_full_rank(self):
        S = np.random.default_rng(1).standard_normal((10, 4))
        basis = svd_update(ReducedBasis.empty(1e-10), S)
        assert compression_ratio(basis) == 1.0

    def test_compression_ratio_before_any_column(self):
        with pytest.raises(BasisConfigError):
            compression_ratio(ReducedBasis.empty(1e-3))

    def test_zero_pad_keeps_reconstruction(self):
        rng = np.random.default_rng(2)
        U, _ = np.linalg.qr(rng.standard_normal((30, 13)))
        S = rng.standard_normal((30, 5))

        padded = zero_pad_basis(U, 16)

        assert padded.shape == (30, 16)
        np.testing.assert_array_equal(padded[:, 13:], 0.0)
        np.testing.assert_allclose(padded @ (padded.T @ S), U @ (U.T @ S), atol=1e-12)
        assert np.all((padded.T @ S)[13:] == 0.0)

    def test_zero_pad_noop(self):
        U = np.eye(20)[:, :16]
        np.testing.assert_array_equal(zero_pad_basis(U, 16), U)

    def test_zero_pad_rejects_bad_targets(self):
        U = np.eye(20)[:, :10]
        with pytest.raises(BasisConfigError, match='below rank'):
            zero_pad_basis(U, 9)
        with pytest.raises(BasisConfigError, match='perfect square'):
            zero_pad_basis(U, 12)

    @pytest.mark.parametrize('rank,side_multiple,expected', [
        (249, 8, 256),
        (13, 4, 16),
        (16, 4, 16),
        (13, 8, 64),
        (0, 8, 64),
        (65, 8, 256),
    ])
    def test_padded_rank(self, rank, side_multiple, expected):
        assert padded_rank(rank, side_multiple) == expected

    def test_save_and_load_basis(self, tmp_path):
        rng = np.random.default_rng(3)
        basis = svd_update(ReducedBasis.empty(1e-3), rng.standard_normal((12, 4)))

        save_basis(tmp_path / 'basis.roms', basis, tmp_path / 'basis_singular_values.roms')
        loaded = load_basis(tmp_path / 'basis.roms', tmp_path / 'basis_singular_values.roms')

        np.testing.assert_array_equal(loaded.U, basis.U)
        np.testing.assert_array_equal(loaded.singular_values, basis.singular_values)
        assert loaded.eps_svd == basis.eps_svd
        assert loaded.columns_seen == 4

    def test_save_empty_basis_rejected(self, tmp_path):
        with pytest.raises(BasisConfigError):
            save_basis(tmp_path / 'b.roms', ReducedBasis.empty(1e-3), tmp_path / 's.roms')

    def test_invalid_eps(self):
        with pytest.raises(BasisConfigError):
            ReducedBasis.empty(1.5)


class TestIncrementalProperty:
    """Incremental truncation stays close to direct truncation for any batch split."""

    @settings(max_examples=25, deadline=None)
    @given(
        seed=st.integers(min_value=0, max_value=10_000),
        n_batches=st.integers(min_value=1, max_value=10),
    )
    def test_any_partition_within_factor(self, seed, n_batches):
        rng = np.random.default_rng(seed)
        S = low_rank_matrix(rng, 30, 20, [8.0, 4.0, 1.0], noise=1e-3)

        incremental = update_with_snapshot(ReducedBasis.empty(5e-2), S, n_batches=n_batches)
        direct = direct_truncated_basis(S, 5e-2)

        err_inc = reconstruction_error(S, incremental.U)
        assert err_inc <= 1.5 * reconstruction_error(S, direct.U) + 1e-12
