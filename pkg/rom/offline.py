"""
Offline phase: adaptive sampling, projection, then CAE, FFNN and LSTM
training in sequence, assembled into a RomBundle.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Dict, List, Mapping, Optional, Sequence

import numpy as np

from bo.loop import BoResult, BoRunConfig, Feasibility, HfmCallback, run_bo
from hfm.parameters import ParameterSpace, ParameterVector
from nn.layers import NetworkConfigError
from nn.networks import build_cae, build_ffnn, build_lstm
from nn.scaling import FeatureScaler
from nn.training import TrainConfig, TrainingHistory, train_network
from nn.windows import build_sliding_windows, merge_windows
from pipeline.seeds import derive_seed
from reduce.projection import project, reconstruction_error
from reduce.svd_update import ReducedBasis, padded_rank, zero_pad_basis
from rom.bundle import RomBundle
from rom.online import encode_snapshot
from utils.errors import NumericalFailure, RomToolkitError

logger = logging.getLogger(__name__)


class OfflineStageError(NumericalFailure):
    """A stage of the offline phase failed; `cause` holds the original error."""

    def __init__(self, stage: str, cause: BaseException):
        self.stage = stage
        self.cause = cause
        super().__init__(f"Offline stage '{stage}' failed: {cause}")


@dataclass(frozen=True)
class RomTrainConfig:
    latent_dim: int = 4
    window: int = 10
    cae: TrainConfig = TrainConfig(learning_rate=5e-4, batch_size=20, epochs=200)
    ffnn: TrainConfig = TrainConfig(learning_rate=1e-2, batch_size=4, epochs=500)
    lstm: TrainConfig = TrainConfig(learning_rate=1e-4, batch_size=10, epochs=1000)
    seed: int = 0

    def __post_init__(self):
        if self.latent_dim < 1:
            raise NetworkConfigError(f"latent_dim must be >= 1, got {self.latent_dim}")
        if self.window < 1:
            raise NetworkConfigError(f"window must be >= 1, got {self.window}")


@dataclass
class OfflineResult:
    bundle: RomBundle
    metrics: Dict[str, float]
    histories: Dict[str, TrainingHistory] = field(default_factory=dict)
    sampling: Optional[BoResult] = None


class _Stage:
    """Context manager that tags toolkit failures with the stage name."""

    def __init__(self, name: str):
        self.name = name

    def __enter__(self):
        logger.info(f"Offline stage '{self.name}' started")
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and isinstance(exc, RomToolkitError) and not isinstance(exc, OfflineStageError):
            logger.error(f"Offline stage '{self.name}' failed: {exc}")
            raise OfflineStageError(self.name, exc) from exc
        return False


def _seeded(config: TrainConfig, root_seed: int, label: str) -> TrainConfig:
    return replace(config, seed=derive_seed(root_seed, label))


def _max_step(trajectories: Sequence[np.ndarray]) -> float:
    steps = [np.linalg.norm(np.diff(z, axis=0), axis=1).max()
             for z in trajectories if z.shape[0] > 1]
    return float(max(steps)) if steps else 0.0


def fit_bundle(
    training_params: Sequence[ParameterVector],
    training_snapshots: Sequence[np.ndarray],
    times: np.ndarray,
    basis: ReducedBasis,
    config: RomTrainConfig,
    space: ParameterSpace,
    provenance: Optional[Mapping[str, str]] = None,
) -> OfflineResult:
    """
    Train the three networks on projected snapshots and assemble the bundle.

    Args:
        training_params: θ of every training snapshot
        training_snapshots: (N_h, N_t) matrices in the same order
        times: (N_t,) time stamps shared by every snapshot
        basis: Reduced basis built from the snapshots
        config: Latent size, window and per-network training settings
        space: Parameter space (bounds stored for the extrapolation check)
        provenance: Config hash and seeds recorded in the manifest

    Returns:
        OfflineResult with the bundle, stage metrics and loss histories

    Raises:
        OfflineStageError: Naming the failed stage
    """
    if len(training_params) != len(training_snapshots) or not training_params:
        raise OfflineStageError('projection', NetworkConfigError(
            f"{len(training_params)} parameters for {len(training_snapshots)} snapshots"
        ))
    times = np.asarray(times, dtype=np.float64).ravel()
    thetas = np.vstack([p.as_array() for p in training_params])
    q, w, root = config.latent_dim, config.window, config.seed
    metrics: Dict[str, float] = {}
    histories: Dict[str, TrainingHistory] = {}

    with _Stage('projection'):
        if basis.is_empty:
            raise NumericalFailure("Basis is empty; nothing to project on")
        for S in training_snapshots:
            if S.shape[1] != times.size:
                raise NetworkConfigError(f"Snapshot has {S.shape[1]} steps, expected {times.size}")
        n = padded_rank(basis.rank)
        U = zero_pad_basis(basis.U, n)
        coords = [project(U, S).T for S in training_snapshots]
        coord_scaler = FeatureScaler.fit(np.vstack(coords))
        metrics['basis_error'] = float(np.mean([reconstruction_error(S, basis.U)
                                                for S in training_snapshots]))
        logger.info(f"Basis rank {basis.rank} padded to {n}; "
                    f"mean training reconstruction error {metrics['basis_error']:.3e}")

    with _Stage('cae'):
        cae = build_cae(n, q, seed=derive_seed(root, 'rom.cae.init'))
        x = np.vstack([coord_scaler.transform(c) for c in coords])
        groups = np.repeat(np.arange(len(coords)), times.size)
        histories['cae'] = train_network(cae, cae.parameters(), x, x,
                                         _seeded(config.cae, root, 'rom.cae.train'),
                                         groups=groups, label='cae')
        latents = [cae.encode(coord_scaler.transform(c)) for c in coords]
        latent_scaler = FeatureScaler.fit(np.vstack(latents))
        latents = [latent_scaler.transform(z) for z in latents]

    param_scaler = FeatureScaler.fit(thetas)
    time_scaler = FeatureScaler.fit(times[:, None])
    theta_scaled = param_scaler.transform(thetas)

    with _Stage('ffnn'):
        head = min(w, times.size)
        ffnn = build_ffnn(space.dim, q, seed=derive_seed(root, 'rom.ffnn.init'))
        t_scaled = time_scaler.transform(times[:head, None])
        inputs = np.vstack([np.hstack([t_scaled, np.tile(th, (head, 1))]) for th in theta_scaled])
        targets = np.vstack([z[:head] for z in latents])
        histories['ffnn'] = train_network(ffnn, ffnn.parameters(), inputs, targets,
                                          _seeded(config.ffnn, root, 'rom.ffnn.train'),
                                          groups=np.repeat(np.arange(len(latents)), head),
                                          label='ffnn')

    with _Stage('lstm'):
        lstm = build_lstm(q, space.dim, w, seed=derive_seed(root, 'rom.lstm.init'))
        windows = merge_windows([build_sliding_windows(z, th, w, group=j)
                                 for j, (z, th) in enumerate(zip(latents, theta_scaled))])
        histories['lstm'] = train_network(lstm, lstm.parameters(), windows.inputs, windows.targets,
                                          _seeded(config.lstm, root, 'rom.lstm.train'),
                                          groups=windows.groups, label='lstm')

    for name, history in histories.items():
        metrics[f'{name}_train_loss'] = history.final_train_loss
        metrics[f'{name}_val_loss'] = history.final_val_loss
    logger.info("Offline metrics: " + ', '.join(f'{k}={v:.3e}' for k, v in sorted(metrics.items())))

    with _Stage('assembly'):
        bundle = RomBundle(
            basis=U,
            rank=basis.rank,
            cae=cae,
            ffnn=ffnn,
            lstm=lstm,
            scalers={'coord': coord_scaler, 'latent': latent_scaler,
                     'param': param_scaler, 'time': time_scaler},
            window=w,
            feature_names=space.names,
            lower=space.lower,
            upper=space.upper,
            t0=float(times[0]),
            time_step=float(times[1] - times[0]) if times.size > 1 else 1.0,
            max_latent_step=_max_step(latents),
            provenance={k: str(v) for k, v in (provenance or {}).items()},
        )
    return OfflineResult(bundle, metrics, histories)


def training_latents(bundle: RomBundle, snapshots: Sequence[np.ndarray]) -> List[np.ndarray]:
    """Scaled latent trajectories of snapshots under a trained bundle."""
    return [encode_snapshot(bundle, S) for S in snapshots]


def train_offline(
    bo_config: BoRunConfig,
    rom_config: RomTrainConfig,
    space: ParameterSpace,
    hfm: HfmCallback,
    times: np.ndarray,
    feasible: Feasibility = None,
    provenance: Optional[Mapping[str, str]] = None,
) -> OfflineResult:
    """
    Full offline phase: adaptive sampling, then fit_bundle on its output.

    Raises:
        OfflineStageError: Naming the failed stage
    """
    with _Stage('sampling'):
        sampling = run_bo(bo_config, space, hfm, feasible=feasible)
        logger.info(f"Sampling selected {len(sampling.training_params)} parameters, "
                    f"test error {sampling.test_error:.3e}")

    result = fit_bundle(sampling.training_params, sampling.training_snapshots, times,
                        sampling.basis, rom_config, space, provenance)
    result.metrics['sampling_test_error'] = sampling.test_error
    result.metrics['n_training'] = float(len(sampling.training_params))
    result.sampling = sampling
    return result
