"""
Incremental truncated SVD over streaming snapshot batches.

Each update projects the new columns on the current basis, orthonormalizes
the residual, takes the SVD of the small core matrix

    K = [[diag(s), U^T C],
         [0,       R    ]]

and truncates. Energy discarded by earlier truncations is carried along so
the relative-energy criterion always refers to every column seen so far.
"""

import logging
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Mapping, Optional

import numpy as np
from scipy import linalg

from storage.array_store import MetaValue, load_array_with_meta, save_array
from utils.errors import ConfigurationError, NumericalFailure

logger = logging.getLogger(__name__)

ORTHO_DRIFT_TOL = 1e-8
RESIDUAL_REL_TOL = 1e-12


class DimensionError(NumericalFailure):
    """Raised when array dimensions do not conform."""
    pass


class BasisConfigError(ConfigurationError):
    """Raised for invalid truncation tolerance or padding target."""
    pass


@dataclass(frozen=True)
class ReducedBasis:
    """
    Orthonormal basis U (N_h x rank) with its singular values.

    `discarded_energy` is the squared Frobenius norm truncated away so far;
    total seen energy = discarded_energy + sum(singular_values**2).
    """
    U: Optional[np.ndarray]
    singular_values: np.ndarray
    eps_svd: float
    columns_seen: int = 0
    discarded_energy: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.eps_svd < 1.0:
            raise BasisConfigError(f"eps_svd must be in (0, 1), got {self.eps_svd}")
        sv = np.asarray(self.singular_values, dtype=np.float64).ravel()
        object.__setattr__(self, 'singular_values', sv)
        if self.U is not None:
            U = np.asarray(self.U, dtype=np.float64)
            if U.ndim != 2 or U.shape[1] != sv.shape[0]:
                raise DimensionError(
                    f"Basis shape {U.shape} does not match {sv.shape[0]} singular values"
                )
            object.__setattr__(self, 'U', U)

    @classmethod
    def empty(cls, eps_svd: float) -> 'ReducedBasis':
        return cls(U=None, singular_values=np.zeros(0), eps_svd=eps_svd)

    @property
    def is_empty(self) -> bool:
        return self.U is None

    @property
    def rank(self) -> int:
        return 0 if self.U is None else self.U.shape[1]

    @property
    def n_rows(self) -> Optional[int]:
        return None if self.U is None else self.U.shape[0]

    def matrix(self, n_rows: Optional[int] = None) -> np.ndarray:
        """U as an array; an empty basis becomes an (n_rows, 0) array."""
        if self.U is not None:
            return self.U
        if n_rows is None:
            raise DimensionError("Empty basis has no row count")
        return np.zeros((n_rows, 0))


def truncate(singular_values: np.ndarray, eps_svd: float, discarded_energy: float = 0.0) -> int:
    """
    Smallest rank r with sqrt((d + sum_{i>r} s_i^2) / (d + sum_i s_i^2)) <= eps_svd.

    Args:
        singular_values: Non-increasing singular values
        eps_svd: Relative energy tolerance in (0, 1)
        discarded_energy: Energy d already truncated by earlier updates

    Returns:
        Rank (0 for an all-zero spectrum)
    """
    if not 0.0 < eps_svd < 1.0:
        raise BasisConfigError(f"eps_svd must be in (0, 1), got {eps_svd}")

    energy = np.asarray(singular_values, dtype=np.float64) ** 2
    total = discarded_energy + float(energy.sum())
    if total <= 0.0 or not np.any(energy > 0.0):
        return 0

    # tail[r] = energy left out when keeping the first r values
    tail = discarded_energy + np.concatenate([np.cumsum(energy[::-1])[::-1], [0.0]])
    budget = eps_svd ** 2 * total
    ranks = np.nonzero(tail <= budget)[0]
    # Earlier discards alone may exhaust the budget: keep everything
    return int(ranks[0]) if ranks.size else len(energy)


def _orthonormality_drift(U: np.ndarray) -> float:
    gram = U.T @ U
    return float(np.max(np.abs(gram - np.eye(U.shape[1])))) if U.size else 0.0


def _reorthonormalize(U: np.ndarray) -> np.ndarray:
    Q, R = linalg.qr(U, mode='economic')
    # Keep column orientation: flip where QR flipped the sign
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1.0
    return Q * signs


def svd_update(basis: ReducedBasis, batch: np.ndarray) -> ReducedBasis:
    """
    Add a batch of snapshot columns to the basis.

    Args:
        basis: Current basis (may be empty)
        batch: N_h x b array of new columns

    Returns:
        New ReducedBasis spanning old range ∪ batch columns to eps_svd

    Raises:
        DimensionError: If the batch row count differs from the basis
    """
    C = np.asarray(batch, dtype=np.float64)
    if C.ndim == 1:
        C = C[:, None]
    if C.ndim != 2:
        raise DimensionError(f"Batch must be 2D, got shape {C.shape}")
    if not basis.is_empty and C.shape[0] != basis.n_rows:
        raise DimensionError(f"Batch has {C.shape[0]} rows, basis has {basis.n_rows}")

    n_cols = C.shape[1]
    seen = basis.columns_seen + n_cols
    batch_norm = float(np.linalg.norm(C))
    if batch_norm == 0.0:
        return replace(basis, columns_seen=seen)

    if basis.is_empty:
        U_full, s_full, _ = linalg.svd(C, full_matrices=False)
    else:
        U = basis.U
        P = U.T @ C
        R = C - U @ P
        residual_norm = float(np.linalg.norm(R))
        r = basis.rank

        if residual_norm <= RESIDUAL_REL_TOL * batch_norm:
            K = np.hstack([np.diag(basis.singular_values), P])
            Uk, s_full, _ = linalg.svd(K, full_matrices=False)
            U_full = U @ Uk
        else:
            Q, Rr = linalg.qr(R, mode='economic')
            K = np.block([
                [np.diag(basis.singular_values), P],
                [np.zeros((Rr.shape[0], r)), Rr],
            ])
            Uk, s_full, _ = linalg.svd(K, full_matrices=False)
            U_full = np.hstack([U, Q]) @ Uk

    rank = truncate(s_full, basis.eps_svd, basis.discarded_energy)
    discarded = basis.discarded_energy + float(np.sum(s_full[rank:] ** 2))

    if rank == 0:
        return ReducedBasis(U=None, singular_values=np.zeros(0), eps_svd=basis.eps_svd,
                            columns_seen=seen, discarded_energy=discarded)

    U_new = U_full[:, :rank]
    drift = _orthonormality_drift(U_new)
    if drift > ORTHO_DRIFT_TOL:
        logger.debug(f"Re-orthonormalizing basis (drift {drift:.2e})")
        U_new = _reorthonormalize(U_new)

    return ReducedBasis(U=U_new, singular_values=s_full[:rank].copy(), eps_svd=basis.eps_svd,
                        columns_seen=seen, discarded_energy=discarded)


def split_columns(S: np.ndarray, n_batches: int) -> list:
    """Split a snapshot matrix into n_batches contiguous column blocks."""
    if n_batches < 1:
        raise BasisConfigError(f"n_batches must be >= 1, got {n_batches}")
    n_batches = min(n_batches, S.shape[1])
    return [block for block in np.array_split(S, n_batches, axis=1) if block.shape[1] > 0]


def update_with_snapshot(basis: ReducedBasis, S: np.ndarray, n_batches: int = 4) -> ReducedBasis:
    """Stream one snapshot matrix into the basis in n_batches column blocks."""
    for block in split_columns(np.asarray(S, dtype=np.float64), n_batches):
        basis = svd_update(basis, block)
    return basis


def build_basis(snapshots: Iterable[np.ndarray], eps_svd: float, n_batches: int = 4) -> ReducedBasis:
    """Build a basis by streaming every snapshot matrix in turn."""
    basis = ReducedBasis.empty(eps_svd)
    for S in snapshots:
        basis = update_with_snapshot(basis, S, n_batches)
    return basis


def direct_truncated_basis(S: np.ndarray, eps_svd: float) -> ReducedBasis:
    """One-shot truncated SVD of an assembled matrix (oracle for the updates)."""
    S = np.asarray(S, dtype=np.float64)
    U, s, _ = linalg.svd(S, full_matrices=False)
    rank = truncate(s, eps_svd)
    discarded = float(np.sum(s[rank:] ** 2))
    if rank == 0:
        return ReducedBasis(None, np.zeros(0), eps_svd, S.shape[1], discarded)
    return ReducedBasis(U[:, :rank], s[:rank], eps_svd, S.shape[1], discarded)


def compression_ratio(basis: ReducedBasis) -> float:
    """
    CPR = rank / columns seen.

    Raises:
        BasisConfigError: If no columns have been processed
    """
    if basis.columns_seen <= 0:
        raise BasisConfigError("Compression ratio undefined before any column is processed")
    return basis.rank / basis.columns_seen


def zero_pad_basis(U: np.ndarray, target_rank: int) -> np.ndarray:
    """
    Append zero columns so the basis has target_rank columns.

    Args:
        U: N_h x rank basis
        target_rank: Perfect square >= rank

    Returns:
        N_h x target_rank array

    Raises:
        BasisConfigError: If target < rank or target is not a perfect square
    """
    U = np.asarray(U, dtype=np.float64)
    rank = U.shape[1]
    if target_rank < rank:
        raise BasisConfigError(f"Padding target {target_rank} is below rank {rank}")
    side = math.isqrt(target_rank)
    if side * side != target_rank:
        raise BasisConfigError(f"Padding target {target_rank} is not a perfect square")
    if target_rank == rank:
        return U.copy()
    return np.hstack([U, np.zeros((U.shape[0], target_rank - rank))])


def padded_rank(rank: int, side_multiple: int = 8) -> int:
    """Smallest perfect square >= rank whose side is a multiple of side_multiple."""
    if rank < 0:
        raise BasisConfigError(f"Rank must be >= 0, got {rank}")
    side = side_multiple * max(1, math.ceil(math.sqrt(rank) / side_multiple))
    while side * side < rank:
        side += side_multiple
    return side * side


def basis_metadata(basis: ReducedBasis) -> dict:
    return {
        'kind': 'basis',
        'rank': basis.rank,
        'eps_svd': float(basis.eps_svd),
        'columns_seen': basis.columns_seen,
        'discarded_energy': float(basis.discarded_energy),
    }


def save_basis(path: Path, basis: ReducedBasis, sv_path: Path,
               extra: Optional[Mapping[str, MetaValue]] = None) -> None:
    """Persist U and its singular values in the shared array format."""
    if basis.is_empty:
        raise BasisConfigError("Cannot persist an empty basis")
    meta = basis_metadata(basis)
    if extra:
        meta.update(extra)
    save_array(path, basis.U, meta)
    save_array(sv_path, basis.singular_values, {'kind': 'singular_values', **(extra or {})})


def load_basis(path: Path, sv_path: Path) -> ReducedBasis:
    """Read a basis written by save_basis."""
    U, meta = load_array_with_meta(path)
    sv, _ = load_array_with_meta(sv_path)
    try:
        return ReducedBasis(
            U=U,
            singular_values=sv.ravel(),
            eps_svd=float(meta['eps_svd']),
            columns_seen=int(meta['columns_seen']),
            discarded_energy=float(meta.get('discarded_energy', 0.0)),
        )
    except KeyError as e:
        raise NumericalFailure(f"Basis metadata lacks field {e}") from None
