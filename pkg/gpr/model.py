"""
Gaussian process regression over (parameter vector -> error) pairs.
Hyperparameters are fitted by multi-start maximum likelihood.
"""

import logging
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy import linalg, optimize

from gpr.kernels import kernel_matern15, kernel_product, kernel_rbf
from storage.array_store import format_metadata, load_array, load_metadata, save_raw_array
from storage.atomic_writer import write_text_atomic
from utils.errors import ArtifactIOError, ConfigurationError, NumericalFailure

logger = logging.getLogger(__name__)

KERNEL_KINDS = ('rbf', 'matern15', 'product')
JITTER_LADDER = (1e-10, 1e-9, 1e-8, 1e-7, 1e-6)
VARIANCE_ROUNDOFF = 1e-12
FAILED_OBJECTIVE = 1e25


class GprError(NumericalFailure):
    """Base class for regression failures."""
    pass


class GprConditioningError(GprError):
    """Raised when the covariance cannot be factorized."""
    pass


class UnfittedModelError(GprError):
    """Raised when a posterior is requested before fitting."""
    pass


class KernelConfigError(ConfigurationError):
    """Raised for invalid kernel settings."""
    pass


@dataclass(frozen=True)
class KernelConfig:
    """
    Kernel family, initial hyperparameters and fitting controls.

    noise is the observation variance added to the diagonal; it is held
    fixed during fitting. For the product kernel, matern_variance stays
    fixed (the overall scale is carried by variance).
    """
    kind: str = 'rbf'
    length_scale: float = 1.0
    variance: float = 1.0
    noise: float = 0.0
    matern_length_scale: float = 1.0
    matern_variance: float = 1.0
    squared_length_scale: bool = False
    standardize_inputs: bool = True
    restarts: int = 8
    length_scale_bounds: Tuple[float, float] = (1e-3, 1e3)
    variance_bounds: Tuple[float, float] = (1e-4, 1e4)

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise KernelConfigError(f"Unknown kernel '{self.kind}', expected one of {KERNEL_KINDS}")
        for name in ('length_scale', 'variance', 'matern_length_scale', 'matern_variance'):
            if getattr(self, name) <= 0:
                raise KernelConfigError(f"{name} must be > 0, got {getattr(self, name)}")
        if self.noise < 0:
            raise KernelConfigError(f"noise must be >= 0, got {self.noise}")
        if self.restarts < 1:
            raise KernelConfigError(f"restarts must be >= 1, got {self.restarts}")
        for name in ('length_scale_bounds', 'variance_bounds'):
            lo, hi = getattr(self, name)
            if not 0 < lo < hi:
                raise KernelConfigError(f"{name} must satisfy 0 < low < high, got {(lo, hi)}")
            object.__setattr__(self, name, (float(lo), float(hi)))

    @property
    def prior_variance(self) -> float:
        if self.kind == 'product':
            return self.variance * self.matern_variance
        return self.variance

    def hyperparameters(self) -> np.ndarray:
        """Free hyperparameters in optimization order."""
        if self.kind == 'product':
            return np.array([self.length_scale, self.variance, self.matern_length_scale])
        return np.array([self.length_scale, self.variance])

    def hyperparameter_bounds(self) -> List[Tuple[float, float]]:
        bounds = [self.length_scale_bounds, self.variance_bounds]
        if self.kind == 'product':
            bounds.append(self.length_scale_bounds)
        return bounds

    def with_hyperparameters(self, values: np.ndarray) -> 'KernelConfig':
        values = [float(v) for v in values]
        if self.kind == 'product':
            return replace(self, length_scale=values[0], variance=values[1],
                           matern_length_scale=values[2])
        return replace(self, length_scale=values[0], variance=values[1])

    def covariance(self, x, y) -> np.ndarray:
        if self.kind == 'rbf':
            return kernel_rbf(x, y, self.length_scale, self.variance, self.squared_length_scale)
        if self.kind == 'matern15':
            return kernel_matern15(x, y, self.length_scale, self.variance)
        return kernel_product(x, y, self.length_scale, self.variance,
                              self.matern_length_scale, self.matern_variance,
                              self.squared_length_scale)


@dataclass(frozen=True)
class GprModel:
    """Fitted regression state. Inputs are stored already standardized."""
    config: KernelConfig
    inputs: np.ndarray
    targets: np.ndarray
    input_mean: np.ndarray
    input_std: np.ndarray
    chol: np.ndarray
    alpha: np.ndarray
    jitter: float
    log_marginal_likelihood: float
    raw_inputs: np.ndarray = field(repr=False, default=None)

    @property
    def n_train(self) -> int:
        return self.inputs.shape[0]

    def standardize(self, x) -> np.ndarray:
        arr = np.atleast_2d(np.asarray(x, dtype=np.float64))
        return (arr - self.input_mean) / self.input_std


def _factorize(K: np.ndarray, noise: float) -> Tuple[np.ndarray, float]:
    """Lower Cholesky factor of K + (noise + jitter) I, escalating jitter."""
    n = K.shape[0]
    for jitter in JITTER_LADDER:
        try:
            L = linalg.cholesky(K + (noise + jitter) * np.eye(n), lower=True)
            return L, jitter
        except linalg.LinAlgError:
            logger.debug(f"Cholesky failed at jitter {jitter:.0e}")
    raise GprConditioningError(
        f"Covariance not factorizable with jitter up to {JITTER_LADDER[-1]:.0e}"
    )


def _log_marginal_likelihood(L: np.ndarray, alpha: np.ndarray, y: np.ndarray) -> float:
    n = y.shape[0]
    return float(-0.5 * y @ alpha - np.sum(np.log(np.diag(L))) - 0.5 * n * math.log(2 * math.pi))


def _condition(config: KernelConfig, X: np.ndarray, y: np.ndarray):
    K = config.covariance(X, X)
    L, jitter = _factorize(K, config.noise)
    alpha = linalg.cho_solve((L, True), y)
    return L, alpha, jitter, _log_marginal_likelihood(L, alpha, y)


def _check_conflicting_duplicates(X: np.ndarray, y: np.ndarray) -> None:
    _, inverse = np.unique(X, axis=0, return_inverse=True)
    inverse = np.asarray(inverse).ravel()
    for group in np.unique(inverse):
        values = y[inverse == group]
        if values.size > 1 and np.ptp(values) > 0:
            raise GprConditioningError(
                "Duplicate inputs with conflicting targets cannot be interpolated without noise"
            )


def _standardization(X: np.ndarray, enabled: bool) -> Tuple[np.ndarray, np.ndarray]:
    if not enabled:
        return np.zeros(X.shape[1]), np.ones(X.shape[1])
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std[std == 0] = 1.0
    return mean, std


def log_marginal_likelihood(config: KernelConfig, inputs: np.ndarray, targets: np.ndarray) -> float:
    """LML of already-standardized inputs under the given hyperparameters."""
    return _condition(config, np.asarray(inputs, float), np.asarray(targets, float))[3]


def _optimize_hyperparameters(config: KernelConfig, X: np.ndarray, y: np.ndarray,
                              rng: np.random.Generator) -> KernelConfig:
    bounds = np.log(np.array(config.hyperparameter_bounds()))
    initial = np.clip(np.log(config.hyperparameters()), bounds[:, 0], bounds[:, 1])

    def objective(log_params: np.ndarray) -> float:
        try:
            candidate = config.with_hyperparameters(np.exp(log_params))
            value = -_condition(candidate, X, y)[3]
        except (GprConditioningError, KernelConfigError):
            return FAILED_OBJECTIVE
        return value if np.isfinite(value) else FAILED_OBJECTIVE

    starts = [initial]
    for _ in range(config.restarts - 1):
        starts.append(rng.uniform(bounds[:, 0], bounds[:, 1]))

    best_params, best_value = initial, objective(initial)
    for start in starts:
        result = optimize.minimize(objective, start, method='L-BFGS-B', bounds=bounds)
        if result.fun < best_value:
            best_params, best_value = result.x, float(result.fun)

    logger.debug(f"MLE best negative log likelihood {best_value:.6g}")
    return config.with_hyperparameters(np.exp(best_params))


def fit(inputs: np.ndarray, targets: np.ndarray, config: KernelConfig,
        seed: Optional[int] = 0, optimize_hyperparameters: bool = True) -> GprModel:
    """
    Fit a zero-mean GP to (inputs, targets).

    Args:
        inputs: (tau, xi) raw parameter vectors
        targets: (tau,) observations
        config: Kernel family and initial hyperparameters
        seed: Seed for the random restarts
        optimize_hyperparameters: When False, keep config hyperparameters as given

    Returns:
        Fitted GprModel

    Raises:
        GprError: Fewer than two distinct inputs or mismatched shapes
        GprConditioningError: Factorization failed after jitter escalation
    """
    X_raw = np.atleast_2d(np.asarray(inputs, dtype=np.float64))
    y = np.asarray(targets, dtype=np.float64).ravel()
    if X_raw.shape[0] != y.shape[0]:
        raise GprError(f"{X_raw.shape[0]} inputs but {y.shape[0]} targets")
    if np.unique(X_raw, axis=0).shape[0] < 2:
        raise GprError("At least two distinct inputs are required")
    if not np.all(np.isfinite(X_raw)) or not np.all(np.isfinite(y)):
        raise GprError("Inputs and targets must be finite")
    if config.noise == 0.0:
        _check_conflicting_duplicates(X_raw, y)

    mean, std = _standardization(X_raw, config.standardize_inputs)
    X = (X_raw - mean) / std

    fitted = config
    if optimize_hyperparameters:
        fitted = _optimize_hyperparameters(config, X, y, np.random.default_rng(seed))

    L, alpha, jitter, lml = _condition(fitted, X, y)
    logger.debug(f"GPR fitted ({fitted.kind}): l={fitted.length_scale:.4g} "
                 f"var={fitted.variance:.4g} jitter={jitter:.0e} lml={lml:.6g}")
    return GprModel(config=fitted, inputs=X, targets=y, input_mean=mean, input_std=std,
                    chol=L, alpha=alpha, jitter=jitter, log_marginal_likelihood=lml,
                    raw_inputs=X_raw)


def posterior(model: Optional[GprModel], points) -> Tuple[np.ndarray, np.ndarray]:
    """
    Posterior mean and variance at query points.

    Args:
        model: Fitted model
        points: (m, xi) raw parameter vectors (or a single vector)

    Returns:
        (mean, variance) arrays of shape (m,)

    Raises:
        UnfittedModelError: If model is None
        GprError: If a variance is negative beyond round-off
    """
    if model is None:
        raise UnfittedModelError("Posterior requested before fit")

    Xq = model.standardize(points)
    Ks = model.config.covariance(Xq, model.inputs)
    mean = Ks @ model.alpha
    v = linalg.solve_triangular(model.chol, Ks.T, lower=True)
    prior = model.config.prior_variance
    var = prior - np.sum(v * v, axis=0)

    tolerance = VARIANCE_ROUNDOFF * max(prior, 1.0)
    if np.any(var < -tolerance):
        raise GprError(f"Posterior variance {var.min():.3e} is negative beyond round-off")
    return mean, np.clip(var, 0.0, prior)


class GaussianProcess:
    """Stateful wrapper: configure, fit, then query."""

    def __init__(self, config: Optional[KernelConfig] = None, seed: Optional[int] = 0):
        self.config = config or KernelConfig()
        self.seed = seed
        self.model: Optional[GprModel] = None

    def fit(self, inputs: np.ndarray, targets: np.ndarray) -> 'GaussianProcess':
        self.model = fit(inputs, targets, self.config, self.seed)
        return self

    def predict(self, points) -> Tuple[np.ndarray, np.ndarray]:
        return posterior(self.model, points)

    @property
    def is_fitted(self) -> bool:
        return self.model is not None


def save_model(directory: Path, model: GprModel) -> Dict[str, Path]:
    """
    Write hyperparameters as key=value text and training data as arrays.

    Returns:
        Paths written, keyed by role
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    meta = {k: v for k, v in asdict(model.config).items() if not isinstance(v, tuple)}
    meta.update({
        'length_scale_bounds': ','.join(repr(b) for b in model.config.length_scale_bounds),
        'variance_bounds': ','.join(repr(b) for b in model.config.variance_bounds),
        'jitter': model.jitter,
        'log_marginal_likelihood': model.log_marginal_likelihood,
    })
    paths = {
        'hyperparameters': directory / 'hyperparameters.txt',
        'inputs': directory / 'gpr_inputs.roms',
        'targets': directory / 'gpr_targets.roms',
        'input_mean': directory / 'gpr_input_mean.roms',
        'input_std': directory / 'gpr_input_std.roms',
    }
    result = write_text_atomic(format_metadata(meta), paths['hyperparameters'])
    if result['status'] != 'completed':
        raise ArtifactIOError(f"GPR hyperparameter write failed: {result['error']}")
    save_raw_array(paths['inputs'], model.inputs)
    save_raw_array(paths['targets'], model.targets)
    save_raw_array(paths['input_mean'], model.input_mean)
    save_raw_array(paths['input_std'], model.input_std)
    return paths


def _parse_bool(text: str) -> bool:
    return text.strip().lower() in ('true', '1', 'yes')


def load_model(directory: Path) -> GprModel:
    """Rebuild a model saved by save_model (refactorizes the covariance)."""
    directory = Path(directory)
    try:
        meta = load_metadata(directory / 'hyperparameters.txt')
        config = KernelConfig(
            kind=meta['kind'],
            length_scale=float(meta['length_scale']),
            variance=float(meta['variance']),
            noise=float(meta['noise']),
            matern_length_scale=float(meta['matern_length_scale']),
            matern_variance=float(meta['matern_variance']),
            squared_length_scale=_parse_bool(meta['squared_length_scale']),
            standardize_inputs=_parse_bool(meta['standardize_inputs']),
            restarts=int(meta['restarts']),
            length_scale_bounds=tuple(float(b) for b in meta['length_scale_bounds'].split(',')),
            variance_bounds=tuple(float(b) for b in meta['variance_bounds'].split(',')),
        )
    except KeyError as e:
        raise ArtifactIOError(f"GPR hyperparameter file lacks field {e}") from None

    X = load_array(directory / 'gpr_inputs.roms')
    y = load_array(directory / 'gpr_targets.roms').ravel()
    mean = load_array(directory / 'gpr_input_mean.roms').ravel()
    std = load_array(directory / 'gpr_input_std.roms').ravel()
    L, alpha, jitter, lml = _condition(config, X, y)
    return GprModel(config=config, inputs=X, targets=y, input_mean=mean, input_std=std,
                    chol=L, alpha=alpha, jitter=jitter, log_marginal_likelihood=lml,
                    raw_inputs=X * std + mean)
