"""
Gaussian process regression on labeled reconstruction errors.
"""

from gpr.kernels import kernel_matern, kernel_matern15, kernel_product, kernel_rbf
from gpr.model import (
    GaussianProcess,
    GprConditioningError,
    GprError,
    GprModel,
    KernelConfig,
    KernelConfigError,
    UnfittedModelError,
    fit,
    load_model,
    log_marginal_likelihood,
    posterior,
    save_model,
)

__all__ = [
    'GaussianProcess',
    'GprConditioningError',
    'GprError',
    'GprModel',
    'KernelConfig',
    'KernelConfigError',
    'UnfittedModelError',
    'fit',
    'kernel_matern',
    'kernel_matern15',
    'kernel_product',
    'kernel_rbf',
    'load_model',
    'log_marginal_likelihood',
    'posterior',
    'save_model',
]
