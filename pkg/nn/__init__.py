"""
Minimal neural-network stack for the latent-dynamics surrogates.

A numpy reverse-mode autodiff engine, dense/conv/pool/upsample/LSTM layers,
Adam, min-max scaling, training loops and checkpoints.
"""

from nn.autodiff import Tensor, mse, parameter
from nn.checkpoint import load_checkpoint, save_checkpoint
from nn.gradcheck import GradientCheckResult, gradient_check
from nn.layers import (
    LSTM,
    Conv2D,
    Dense,
    Flatten,
    MaxPool2D,
    NetworkConfigError,
    Reshape,
    Sequential,
    UpSample2D,
)
from nn.networks import Autoencoder, build_cae, build_ffnn, build_lstm, image_side
from nn.optim import Adam, AdamState, adam_step
from nn.scaling import FeatureScaler
from nn.training import (
    TrainConfig,
    TrainingDivergenceError,
    TrainingFault,
    TrainingHistory,
    train_network,
)
from nn.windows import SlidingWindowDataset, build_sliding_windows, merge_windows, window_inputs

__all__ = [
    'Adam',
    'AdamState',
    'Autoencoder',
    'Conv2D',
    'Dense',
    'FeatureScaler',
    'Flatten',
    'GradientCheckResult',
    'LSTM',
    'MaxPool2D',
    'NetworkConfigError',
    'Reshape',
    'Sequential',
    'SlidingWindowDataset',
    'Tensor',
    'TrainConfig',
    'TrainingDivergenceError',
    'TrainingFault',
    'TrainingHistory',
    'UpSample2D',
    'adam_step',
    'build_cae',
    'build_ffnn',
    'build_lstm',
    'build_sliding_windows',
    'gradient_check',
    'image_side',
    'load_checkpoint',
    'merge_windows',
    'mse',
    'parameter',
    'save_checkpoint',
    'train_network',
    'window_inputs',
]
