"""
Damage indices: squared deviation of each sample trajectory from the
baseline (mean) trajectory at a sensor node, normalized by the largest one.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from utils.errors import NumericalFailure

logger = logging.getLogger(__name__)


class DamageIndexError(NumericalFailure):
    """Raised when the baseline has zero norm or every raw index is zero."""
    pass


@dataclass(frozen=True)
class DamageIndexSet:
    values: np.ndarray
    raw: np.ndarray
    normalization: float
    node: Optional[int] = None

    def to_frame(self, thetas: Optional[np.ndarray] = None,
                 names: Optional[Sequence[str]] = None) -> pd.DataFrame:
        """sample, [feature columns], DI"""
        frame = pd.DataFrame({'sample': np.arange(self.values.size)})
        if thetas is not None:
            thetas = np.atleast_2d(thetas)
            names = list(names) if names is not None else [f'x{i}' for i in range(thetas.shape[1])]
            for j, name in enumerate(names):
                frame[name] = thetas[:, j]
        frame['DI'] = self.values
        return frame


def damage_index(trajectories: np.ndarray, baseline: np.ndarray,
                 node: Optional[int] = None) -> DamageIndexSet:
    """
    DI_j = raw_j / max(raw) with raw_j = sum_i (u_j(t_i) - u^mu(t_i))^2 / sum_i u^mu(t_i)^2.

    Args:
        trajectories: (r, N_t) series at the node, or (r, N_h, N_t) fields with `node` set
        baseline: Baseline series (N_t,), or (N_h, N_t) field with `node` set
        node: Node index used when full fields are given

    Raises:
        DamageIndexError: If the baseline norm or every raw index is zero
    """
    series = np.asarray(trajectories, dtype=np.float64)
    base = np.asarray(baseline, dtype=np.float64)
    if node is not None:
        if series.ndim == 3:
            series = series[:, node, :]
        if base.ndim == 2:
            base = base[node]
    series = np.atleast_2d(series)
    if series.ndim != 2 or base.ndim != 1 or series.shape[1] != base.shape[0]:
        raise NumericalFailure(
            f"Trajectories {series.shape} do not match baseline {base.shape}"
        )

    base_norm = float(np.sum(base ** 2))
    if base_norm == 0.0:
        raise DamageIndexError(f"Baseline at node {node} has zero norm")

    raw = np.sum((series - base) ** 2, axis=1) / base_norm
    largest = float(raw.max())
    if largest == 0.0:
        raise DamageIndexError("Every sample equals the baseline; damage indices undefined")

    values = raw / largest
    logger.info(f"Damage indices for {raw.size} samples at node {node}: max raw {largest:.3e}")
    return DamageIndexSet(values=values, raw=raw, normalization=largest, node=node)
