"""
Linear dimensionality reduction.

Streaming truncated SVD of snapshot batches, projection, reconstruction
and the relative l2 error estimators used as sampling labels.
"""

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
from reduce.projection import (
    LabeledDataset,
    UndefinedErrorMeasure,
    mean_test_error,
    project,
    reconstruct,
    reconstruction_error,
)

__all__ = [
    'BasisConfigError',
    'DimensionError',
    'LabeledDataset',
    'ReducedBasis',
    'UndefinedErrorMeasure',
    'build_basis',
    'compression_ratio',
    'direct_truncated_basis',
    'load_basis',
    'mean_test_error',
    'padded_rank',
    'project',
    'reconstruct',
    'reconstruction_error',
    'save_basis',
    'split_columns',
    'svd_update',
    'truncate',
    'update_with_snapshot',
    'zero_pad_basis',
]
