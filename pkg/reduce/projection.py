"""
Projection onto a reduced basis and the l2 error estimators driving sampling.
"""

import logging
from dataclasses import dataclass, field
from typing import Iterable, List, Sequence, Tuple

import numpy as np

from hfm.parameters import ParameterVector
from reduce.svd_update import DimensionError
from utils.errors import NumericalFailure

logger = logging.getLogger(__name__)


class UndefinedErrorMeasure(NumericalFailure):
    """Raised when an error estimate has a zero denominator or no inputs."""
    pass


def _conform(U: np.ndarray, S: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    U = np.asarray(U, dtype=np.float64)
    S = np.asarray(S, dtype=np.float64)
    if U.ndim != 2:
        raise DimensionError(f"Basis must be 2D, got shape {U.shape}")
    if S.shape[0] != U.shape[0]:
        raise DimensionError(f"Field has {S.shape[0]} rows, basis has {U.shape[0]}")
    return U, S


def project(U: np.ndarray, S: np.ndarray) -> np.ndarray:
    """Reduced coordinates U^T S (rank x N_t, or rank for a single column)."""
    U, S = _conform(U, S)
    return U.T @ S


def reconstruct(U: np.ndarray, coords: np.ndarray) -> np.ndarray:
    """Full field U @ coords."""
    U = np.asarray(U, dtype=np.float64)
    coords = np.asarray(coords, dtype=np.float64)
    if coords.shape[0] != U.shape[1]:
        raise DimensionError(f"Coordinates have {coords.shape[0]} rows, basis rank is {U.shape[1]}")
    return U @ coords


def reconstruction_error(S: np.ndarray, U: np.ndarray) -> float:
    """
    Relative error ||S - U U^T S||_F / ||S||_F.

    A rank-0 basis (N_h x 0) reconstructs nothing, so the error is 1.

    Raises:
        UndefinedErrorMeasure: If ||S||_F is zero
    """
    U, S = _conform(U, S)
    norm = float(np.linalg.norm(S))
    if norm == 0.0:
        raise UndefinedErrorMeasure("Reconstruction error undefined for a zero-norm field")
    if U.shape[1] == 0:
        return 1.0
    residual = S - U @ (U.T @ S)
    return float(min(1.0, np.linalg.norm(residual) / norm))


def mean_test_error(test_snapshots: Sequence[np.ndarray], U: np.ndarray) -> float:
    """
    Mean reconstruction error over the testing snapshot matrices.

    Raises:
        UndefinedErrorMeasure: If the test set is empty
    """
    if len(test_snapshots) == 0:
        raise UndefinedErrorMeasure("Mean test error undefined for an empty test set")
    errors = [reconstruction_error(S, U) for S in test_snapshots]
    return float(np.mean(errors))


@dataclass
class LabeledDataset:
    """Training parameters paired with their reconstruction errors."""
    thetas: List[ParameterVector] = field(default_factory=list)
    errors: List[float] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.thetas)

    def add(self, theta: ParameterVector, error: float) -> None:
        if not 0.0 <= error <= 1.0:
            raise UndefinedErrorMeasure(f"Reconstruction error {error} outside [0, 1]")
        self.thetas.append(theta)
        self.errors.append(float(error))

    def relabel(self, snapshots: Iterable[np.ndarray], U: np.ndarray) -> None:
        """Recompute every stored error against basis U (one snapshot per entry)."""
        new_errors = [reconstruction_error(S, U) for S in snapshots]
        if len(new_errors) != len(self.thetas):
            raise DimensionError(
                f"Relabel got {len(new_errors)} snapshots for {len(self.thetas)} entries"
            )
        self.errors = new_errors

    def inputs(self) -> np.ndarray:
        return np.array([theta.as_array() for theta in self.thetas])

    def targets(self) -> np.ndarray:
        return np.asarray(self.errors, dtype=np.float64)
