"""
RomBundle: padded basis, the three trained networks and their scalers.

On disk a bundle is a directory holding `bundle.manifest` (key=value lines),
`basis.roms` and one checkpoint per network.
"""

import hashlib
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Mapping, Tuple

import numpy as np

from nn.checkpoint import load_checkpoint, save_checkpoint
from nn.layers import NetworkConfigError, Sequential
from nn.networks import Autoencoder, image_side
from nn.scaling import FeatureScaler
from storage.array_store import (
    FORMAT_VERSION,
    MetaValue,
    format_metadata,
    load_array,
    load_metadata,
    save_raw_array,
)
from storage.atomic_writer import write_text_atomic
from utils.errors import ArtifactIOError

logger = logging.getLogger(__name__)

MANIFEST_NAME = 'bundle.manifest'
BASIS_NAME = 'basis.roms'
SCALERS = ('coord', 'latent', 'param', 'time')


class BundleValidationError(ArtifactIOError):
    """Raised when a bundle is missing, corrupt or internally inconsistent."""

    def __init__(self, field_name: str, message: str):
        self.field = field_name
        super().__init__(f"Bundle field '{field_name}': {message}")


@dataclass
class RomBundle:
    """
    Deployable surrogate.

    Scalers map to [-1, 1]: `coord` over padded reduced coordinates, `latent`
    over CAE latents, `param` over θ and `time` over time stamps. The FFNN
    reads [time; θ] and the LSTM reads windows of [latent; θ], all scaled.
    """
    basis: np.ndarray
    rank: int
    cae: Autoencoder
    ffnn: Sequential
    lstm: Sequential
    scalers: Dict[str, FeatureScaler]
    window: int
    feature_names: Tuple[str, ...]
    lower: np.ndarray
    upper: np.ndarray
    t0: float
    time_step: float
    max_latent_step: float
    provenance: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        self.basis = np.asarray(self.basis, dtype=np.float64)
        self.lower = np.asarray(self.lower, dtype=np.float64)
        self.upper = np.asarray(self.upper, dtype=np.float64)
        self.feature_names = tuple(self.feature_names)
        self.validate()

    @property
    def latent_dim(self) -> int:
        return self.cae.latent_dim

    @property
    def padded_rank(self) -> int:
        return self.basis.shape[1]

    @property
    def n_nodes(self) -> int:
        return self.basis.shape[0]

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    def times(self, n_t: int) -> np.ndarray:
        return self.t0 + self.time_step * np.arange(n_t)

    def validate(self) -> None:
        """
        Check that component dimensions agree.

        Raises:
            BundleValidationError: Naming the first inconsistent field
        """
        q, xi = self.latent_dim, self.n_features
        if self.basis.ndim != 2:
            raise BundleValidationError('basis', f"expected a 2D array, got {self.basis.shape}")
        if not 0 < self.rank <= self.padded_rank:
            raise BundleValidationError('rank', f"{self.rank} outside (0, {self.padded_rank}]")
        if self.cae.input_dim != self.padded_rank:
            raise BundleValidationError(
                'padded_rank', f"CAE input {self.cae.input_dim} != basis width {self.padded_rank}"
            )
        if self.ffnn.layers[0].in_features != xi + 1:
            raise BundleValidationError('ffnn', f"input width must be {xi + 1}")
        if self.ffnn.layers[-1].out_features != q:
            raise BundleValidationError('ffnn', f"output width must be {q}")
        if self.lstm.layers[0].in_features != q + xi:
            raise BundleValidationError('lstm', f"input width must be {q + xi}")
        if self.lstm.layers[-1].out_features != q:
            raise BundleValidationError('lstm', f"output width must be {q}")
        if self.window < 1:
            raise BundleValidationError('window', f"must be >= 1, got {self.window}")
        if self.lower.shape != (xi,) or self.upper.shape != (xi,):
            raise BundleValidationError('bounds', f"expected {xi} lower/upper values")

        expected = {'coord': self.padded_rank, 'latent': q, 'param': xi, 'time': 1}
        for name, width in expected.items():
            scaler = self.scalers.get(name)
            if scaler is None:
                raise BundleValidationError(f'scaler.{name}', "missing")
            if scaler.n_features != width:
                raise BundleValidationError(
                    f'scaler.{name}', f"has {scaler.n_features} features, expected {width}"
                )


def _floats(values: np.ndarray) -> str:
    return ','.join(repr(float(v)) for v in np.asarray(values).ravel())


def _manifest_entries(bundle: RomBundle) -> Dict[str, MetaValue]:
    entries: Dict[str, MetaValue] = {
        'kind': 'rom_bundle',
        'format_version': FORMAT_VERSION,
        'rank': bundle.rank,
        'padded_rank': bundle.padded_rank,
        'n_nodes': bundle.n_nodes,
        'latent_dim': bundle.latent_dim,
        'window': bundle.window,
        'feature_names': ','.join(bundle.feature_names),
        'lower': _floats(bundle.lower),
        'upper': _floats(bundle.upper),
        'time.t0': float(bundle.t0),
        'time.step': float(bundle.time_step),
        'max_latent_step': float(bundle.max_latent_step),
    }
    for name in SCALERS:
        scaler = bundle.scalers[name]
        entries[f'scaler.{name}.center'] = _floats(scaler.center)
        entries[f'scaler.{name}.half_range'] = _floats(scaler.half_range)
    for key, value in bundle.provenance.items():
        entries[f'provenance.{key}'] = value
    return entries


def _networks(bundle: RomBundle) -> Tuple[Sequential, ...]:
    return bundle.cae.encoder, bundle.cae.decoder, bundle.ffnn, bundle.lstm


def bundle_hash(bundle: RomBundle) -> str:
    """SHA-256 over the manifest entries, the basis and every network parameter."""
    digest = hashlib.sha256()
    digest.update(format_metadata(_manifest_entries(bundle)).encode('utf-8'))
    digest.update(np.ascontiguousarray(bundle.basis).tobytes())
    for network in _networks(bundle):
        for layer in network.layers:
            digest.update(format_metadata(layer.config()).encode('utf-8'))
        for p in network.parameters():
            digest.update(p.name.encode('utf-8'))
            digest.update(np.ascontiguousarray(p.data).tobytes())
    return digest.hexdigest()


def save_bundle(directory: Path, bundle: RomBundle) -> Path:
    """
    Write a bundle directory.

    Returns:
        Path of the manifest

    Raises:
        ArtifactIOError: If any write fails
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    save_raw_array(directory / BASIS_NAME, bundle.basis)
    provenance = {f'provenance.{k}': v for k, v in bundle.provenance.items()}
    for network in _networks(bundle):
        save_checkpoint(directory, network, provenance)

    entries = _manifest_entries(bundle)
    entries['bundle_hash'] = bundle_hash(bundle)
    path = directory / MANIFEST_NAME
    result = write_text_atomic(format_metadata(entries), path)
    if result['status'] != 'completed':
        raise ArtifactIOError(f"Bundle manifest write failed for {path}: {result['error']}")
    logger.info(f"Saved ROM bundle to {directory} (hash {entries['bundle_hash'][:12]})")
    return path


def _field(meta: Mapping[str, str], key: str) -> str:
    if key not in meta:
        raise BundleValidationError(key, "missing from manifest")
    return meta[key]


def _int_field(meta: Mapping[str, str], key: str) -> int:
    try:
        return int(_field(meta, key))
    except ValueError:
        raise BundleValidationError(key, f"not an integer: {meta[key]!r}") from None


def _float_field(meta: Mapping[str, str], key: str) -> float:
    try:
        value = float(_field(meta, key))
    except ValueError:
        raise BundleValidationError(key, f"not a number: {meta[key]!r}") from None
    if not math.isfinite(value):
        raise BundleValidationError(key, f"not finite: {value}")
    return value


def _array_field(meta: Mapping[str, str], key: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in _field(meta, key).split(',')])
    except ValueError:
        raise BundleValidationError(key, f"not a number list: {meta[key]!r}") from None


def _load_network(directory: Path, name: str) -> Sequential:
    try:
        network, _ = load_checkpoint(directory, name)
    except ArtifactIOError as e:
        raise BundleValidationError(name, str(e)) from None
    return network


def load_bundle(directory: Path) -> RomBundle:
    """
    Read and validate a bundle written by save_bundle.

    Raises:
        BundleValidationError: Naming the missing, corrupt or inconsistent field
    """
    directory = Path(directory)
    try:
        meta = load_metadata(directory / MANIFEST_NAME)
    except ArtifactIOError as e:
        raise BundleValidationError(MANIFEST_NAME, str(e)) from None

    if _field(meta, 'kind') != 'rom_bundle':
        raise BundleValidationError('kind', f"expected 'rom_bundle', got {meta['kind']!r}")

    try:
        basis = load_array(directory / BASIS_NAME)
    except ArtifactIOError as e:
        raise BundleValidationError(BASIS_NAME, str(e)) from None
    if basis.shape != (_int_field(meta, 'n_nodes'), _int_field(meta, 'padded_rank')):
        raise BundleValidationError('padded_rank', f"basis file has shape {basis.shape}")

    encoder = _load_network(directory, 'encoder')
    decoder = _load_network(directory, 'decoder')
    try:
        side = image_side(basis.shape[1])
    except NetworkConfigError as e:
        raise BundleValidationError('padded_rank', str(e)) from None
    cae = Autoencoder(encoder, decoder, side, _int_field(meta, 'latent_dim'))

    scalers = {
        name: FeatureScaler(_array_field(meta, f'scaler.{name}.center'),
                            _array_field(meta, f'scaler.{name}.half_range'))
        for name in SCALERS
    }
    provenance = {k[len('provenance.'):]: v for k, v in meta.items() if k.startswith('provenance.')}

    try:
        bundle = RomBundle(
            basis=basis,
            rank=_int_field(meta, 'rank'),
            cae=cae,
            ffnn=_load_network(directory, 'ffnn'),
            lstm=_load_network(directory, 'lstm'),
            scalers=scalers,
            window=_int_field(meta, 'window'),
            feature_names=tuple(_field(meta, 'feature_names').split(',')),
            lower=_array_field(meta, 'lower'),
            upper=_array_field(meta, 'upper'),
            t0=_float_field(meta, 'time.t0'),
            time_step=_float_field(meta, 'time.step'),
            max_latent_step=_float_field(meta, 'max_latent_step'),
            provenance=provenance,
        )
    except (AttributeError, IndexError) as e:
        raise BundleValidationError('layers', f"network layout unusable: {e}") from None

    stored = meta.get('bundle_hash')
    if stored is not None and stored != bundle_hash(bundle):
        raise BundleValidationError('bundle_hash', "content does not match the recorded hash")
    return bundle
