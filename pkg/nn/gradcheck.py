"""
Central finite-difference gradient check.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, Sequence

import numpy as np

from nn.autodiff import Tensor

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GradientCheckResult:
    max_abs_error: Dict[str, float]
    max_rel_error: Dict[str, float]
    passed: bool


def gradient_check(loss_fn: Callable[[], Tensor], params: Sequence[Tensor],
                   step: float = 1e-6, rtol: float = 1e-4, atol: float = 1e-7) -> GradientCheckResult:
    """
    Compare backprop gradients with central differences element by element.

    An element passes when |analytic - numeric| <= atol + rtol * |numeric|.

    Args:
        loss_fn: Builds a scalar loss from the current parameter values
        params: Tensors to check (modified temporarily, restored afterwards)
        step: Finite-difference step
        rtol: Relative tolerance
        atol: Absolute floor for near-zero gradients
    """
    for p in params:
        p.zero_grad()
    loss_fn().backward()
    analytic = {id(p): (p.grad.copy() if p.grad is not None else np.zeros_like(p.data))
                for p in params}

    abs_errors, rel_errors = {}, {}
    passed = True
    for index, p in enumerate(params):
        label = p.name or f'param{index}'
        p.data = np.ascontiguousarray(p.data)
        numeric = np.zeros_like(p.data)
        flat = p.data.reshape(-1)
        for k in range(flat.size):
            original = flat[k]
            flat[k] = original + step
            plus = float(loss_fn().data)
            flat[k] = original - step
            minus = float(loss_fn().data)
            flat[k] = original
            numeric.reshape(-1)[k] = (plus - minus) / (2.0 * step)

        diff = np.abs(analytic[id(p)] - numeric)
        abs_errors[label] = float(diff.max()) if diff.size else 0.0
        rel = diff / np.maximum(np.abs(numeric), atol)
        rel_errors[label] = float(rel.max()) if rel.size else 0.0
        if np.any(diff > atol + rtol * np.abs(numeric)):
            passed = False
            logger.debug(f"Gradient mismatch in {label}: max abs error {abs_errors[label]:.3e}")

    for p in params:
        p.zero_grad()
    return GradientCheckResult(abs_errors, rel_errors, passed)
