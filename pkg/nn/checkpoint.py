"""
Network checkpoints: a key=value manifest of layer configs plus one array
file per parameter in the shared array format.
"""

from pathlib import Path
from typing import Dict, Mapping, Optional, Tuple

import numpy as np

from nn.layers import NetworkConfigError, Sequential, layer_from_config
from storage.array_store import (
    MetaValue,
    format_metadata,
    load_array,
    load_metadata,
    save_raw_array,
)
from storage.atomic_writer import write_text_atomic
from utils.errors import ArtifactIOError


def manifest_path(directory: Path, network: str) -> Path:
    return Path(directory) / f'{network}.manifest'


def parameter_path(directory: Path, network: str, parameter: str) -> Path:
    return Path(directory) / f'{network}.{parameter}.roms'


def save_checkpoint(directory: Path, network: Sequential,
                    extra: Optional[Mapping[str, MetaValue]] = None) -> Path:
    """
    Write a network's manifest and parameter arrays.

    Returns:
        Path of the manifest
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    meta: Dict[str, MetaValue] = {'network': network.name, 'n_layers': len(network.layers)}
    for index, layer in enumerate(network.layers):
        for key, value in layer.config().items():
            meta[f'layer.{index:02d}.{key}'] = value
    for p in network.parameters():
        meta[f'shape.{p.name}'] = 'x'.join(str(s) for s in p.data.shape)
        save_raw_array(parameter_path(directory, network.name, p.name), p.data.reshape(-1))
    if extra:
        meta.update(extra)

    path = manifest_path(directory, network.name)
    result = write_text_atomic(format_metadata(meta), path)
    if result['status'] != 'completed':
        raise ArtifactIOError(f"Manifest write failed for {path}: {result['error']}")
    return path


def load_checkpoint(directory: Path, network: str) -> Tuple[Sequential, Dict[str, str]]:
    """
    Rebuild a network saved by save_checkpoint.

    Returns:
        (network, manifest entries)

    Raises:
        ArtifactIOError: Missing files or manifest fields
    """
    meta = load_metadata(manifest_path(directory, network))
    try:
        n_layers = int(meta['n_layers'])
        layers = []
        for index in range(n_layers):
            prefix = f'layer.{index:02d}.'
            config = {k[len(prefix):]: v for k, v in meta.items() if k.startswith(prefix)}
            if not config:
                raise KeyError(f'{prefix}kind')
            layers.append(layer_from_config(config))
    except KeyError as e:
        raise ArtifactIOError(f"Manifest for {network} lacks field {e}") from None
    except (NetworkConfigError, ValueError) as e:
        raise ArtifactIOError(f"Manifest for {network} is invalid: {e}") from None

    model = Sequential(layers, name=meta.get('network', network))
    for p in model.parameters():
        shape_text = meta.get(f'shape.{p.name}')
        if shape_text is None:
            raise ArtifactIOError(f"Manifest for {network} lacks field shape.{p.name}")
        shape = tuple(int(s) for s in shape_text.split('x'))
        values = load_array(parameter_path(directory, network, p.name)).reshape(-1)
        if shape != p.data.shape or values.size != p.data.size:
            raise ArtifactIOError(f"Parameter {p.name} has shape {shape}, expected {p.data.shape}")
        p.data = values.reshape(shape).copy()
    return model, meta
