"""
Shared binary array format and key=value metadata sidecars.

Layout (little-endian):
    b"ROMS" | u16 version | u64 n_rows | u64 n_cols | n_rows*n_cols float64,
    column-major (one full column per retained time step).
"""

import hashlib
import struct
from pathlib import Path
from typing import Dict, Mapping, Tuple, Union

import numpy as np

from storage.atomic_writer import AtomicWriteError, write_bytes_atomic, write_pair_atomic
from utils.errors import ArtifactIOError

MAGIC = b'ROMS'
FORMAT_VERSION = 1
_HEADER = struct.Struct('<4sHQQ')

MetaValue = Union[str, int, float, bool]


class ArrayFormatError(ArtifactIOError):
    """Raised when an array file or sidecar is malformed."""
    pass


def encode_array(values: np.ndarray) -> bytes:
    """
    Encode a 1D/2D array into the shared binary format.

    Args:
        values: Array of shape (n_rows, n_cols) or (n_rows,)

    Returns:
        Encoded bytes

    Raises:
        ArrayFormatError: If the array has more than two axes
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ArrayFormatError(f"Only 1D/2D arrays are supported, got shape {arr.shape}")

    n_rows, n_cols = arr.shape
    header = _HEADER.pack(MAGIC, FORMAT_VERSION, n_rows, n_cols)
    return header + arr.astype('<f8').tobytes(order='F')


def decode_array(blob: bytes) -> np.ndarray:
    """
    Decode bytes in the shared binary format.

    Args:
        blob: Encoded bytes

    Returns:
        Array of shape (n_rows, n_cols)

    Raises:
        ArrayFormatError: On bad magic, version or payload size
    """
    if len(blob) < _HEADER.size:
        raise ArrayFormatError(f"Truncated header: {len(blob)} bytes")

    magic, version, n_rows, n_cols = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise ArrayFormatError(f"Bad magic bytes: {magic!r}")
    if version != FORMAT_VERSION:
        raise ArrayFormatError(f"Unsupported format version: {version}")

    expected = n_rows * n_cols * 8
    payload = blob[_HEADER.size:]
    if len(payload) != expected:
        raise ArrayFormatError(
            f"Payload size mismatch: expected {expected} bytes, got {len(payload)}"
        )

    flat = np.frombuffer(payload, dtype='<f8').astype(np.float64)
    return flat.reshape((n_rows, n_cols), order='F')


def format_metadata(meta: Mapping[str, MetaValue]) -> str:
    """
    Render metadata as sorted key=value lines.

    Floats use repr so values round-trip exactly.
    """
    lines = []
    for key in sorted(meta):
        value = meta[key]
        if '=' in key or '\n' in key:
            raise ArrayFormatError(f"Invalid metadata key: {key!r}")
        if isinstance(value, float):
            text = repr(value)
        else:
            text = str(value)
        if '\n' in text:
            raise ArrayFormatError(f"Metadata value for {key} spans lines")
        lines.append(f'{key}={text}')
    return '\n'.join(lines) + '\n'


def parse_metadata(text: str) -> Dict[str, str]:
    """
    Parse key=value lines; blank lines and '#' comments are skipped.

    Raises:
        ArrayFormatError: On a line without '='
    """
    meta = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith('#'):
            continue
        if '=' not in stripped:
            raise ArrayFormatError(f"Malformed metadata line {lineno}: {line!r}")
        key, value = stripped.split('=', 1)
        meta[key.strip()] = value.strip()
    return meta


def sidecar_path(data_path: Path) -> Path:
    """Path of the metadata sidecar for a data file."""
    data_path = Path(data_path)
    return data_path.with_name(data_path.name + '.meta')


def save_array(path: Path, values: np.ndarray, meta: Mapping[str, MetaValue]) -> Dict[str, object]:
    """
    Write an array file plus its sidecar atomically.

    Args:
        path: Destination of the array file
        values: Array to store
        meta: Metadata written to '<path>.meta'

    Returns:
        Write result dictionary
    """
    full_meta = dict(meta)
    full_meta['format_version'] = FORMAT_VERSION
    return write_pair_atomic(
        data=encode_array(values),
        sidecar=format_metadata(full_meta),
        data_path=Path(path),
        sidecar_path=sidecar_path(path),
    )


def save_raw_array(path: Path, values: np.ndarray) -> None:
    """Write an array file without a sidecar (component of a larger artifact)."""
    result = write_bytes_atomic(encode_array(values), Path(path))
    if result['status'] != 'completed':
        raise AtomicWriteError(f"Array write failed for {path}: {result['error']}")


def load_array(path: Path) -> np.ndarray:
    """
    Read an array file.

    Raises:
        ArtifactIOError: If the file is missing or malformed
    """
    path = Path(path)
    if not path.exists():
        raise ArtifactIOError(f"Array file not found: {path}")
    return decode_array(path.read_bytes())


def load_metadata(path: Path) -> Dict[str, str]:
    """
    Read metadata from a sidecar or manifest file.

    Raises:
        ArtifactIOError: If the file is missing or malformed
    """
    path = Path(path)
    if not path.exists():
        raise ArtifactIOError(f"Metadata file not found: {path}")
    return parse_metadata(path.read_text(encoding='utf-8'))


def load_array_with_meta(path: Path) -> Tuple[np.ndarray, Dict[str, str]]:
    """Read an array file together with its sidecar."""
    return load_array(path), load_metadata(sidecar_path(path))


def file_digest(path: Path) -> str:
    """SHA-256 hex digest of a file's bytes."""
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
