"""
Reduced-order model assembly.

Offline phase (sampling, projection, CAE/FFNN/LSTM training) producing a
RomBundle, and the online phase predicting full fields from it.
"""

from rom.bundle import (
    BundleValidationError,
    RomBundle,
    bundle_hash,
    load_bundle,
    save_bundle,
)
from rom.metrics import NormalizationWarning, UndefinedNormalizationError, nrmse, nrmse_series
from rom.online import (
    ExtrapolationWarning,
    RolloutWarning,
    encode_snapshot,
    predict,
    rollout_latents,
    teacher_forced_latents,
)
from rom.offline import (
    OfflineResult,
    OfflineStageError,
    RomTrainConfig,
    fit_bundle,
    train_offline,
    training_latents,
)

__all__ = [
    'BundleValidationError',
    'ExtrapolationWarning',
    'NormalizationWarning',
    'OfflineResult',
    'OfflineStageError',
    'RolloutWarning',
    'RomBundle',
    'RomTrainConfig',
    'UndefinedNormalizationError',
    'bundle_hash',
    'encode_snapshot',
    'fit_bundle',
    'load_bundle',
    'nrmse',
    'nrmse_series',
    'predict',
    'rollout_latents',
    'save_bundle',
    'teacher_forced_latents',
    'train_offline',
    'training_latents',
]
