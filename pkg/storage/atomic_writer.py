"""
Atomic file writer - ensures no partial artifact files.
Implements temp-write → fsync → rename for binary arrays and text sidecars.
"""

import os
import tempfile
from pathlib import Path
from typing import Any, Dict, Union

from utils.errors import ArtifactIOError


class AtomicWriteError(ArtifactIOError):
    """Raised when atomic write operations fail."""
    pass


def write_bytes_atomic(content: bytes, output_path: Path) -> Dict[str, Any]:
    """
    Write bytes atomically to prevent partial files.

    Args:
        content: Bytes to write
        output_path: Final path of the file

    Returns:
        Dictionary with write results ('status', 'bytes_written', ...)
    """
    output_path = Path(output_path)
    temp_path = None

    try:
        output_path.parent.mkdir(parents=True, exist_ok=True)

        # Temp file in the same directory so the rename stays on one filesystem
        temp_fd, temp_path_str = tempfile.mkstemp(
            suffix='.tmp',
            prefix=f'{output_path.stem}_',
            dir=output_path.parent
        )
        temp_path = Path(temp_path_str)

        with os.fdopen(temp_fd, 'wb') as f:
            f.write(content)
            f.flush()
            os.fsync(f.fileno())

        os.replace(temp_path, output_path)

        return {
            'status': 'completed',
            'output_path': str(output_path),
            'bytes_written': len(content),
        }

    except Exception as e:
        if temp_path is not None and temp_path.exists():
            try:
                temp_path.unlink()
            except OSError:
                pass

        return {
            'status': 'failed',
            'error': str(e),
            'output_path': str(output_path),
            'bytes_written': 0,
        }


def write_text_atomic(content: str, output_path: Path) -> Dict[str, Any]:
    """
    Write UTF-8 text atomically.

    Args:
        content: Text content
        output_path: Final path of the file

    Returns:
        Dictionary with write results
    """
    return write_bytes_atomic(content.encode('utf-8'), output_path)


def write_pair_atomic(
    data: Union[bytes, str],
    sidecar: str,
    data_path: Path,
    sidecar_path: Path
) -> Dict[str, Any]:
    """
    Write a data file and its metadata sidecar.

    If the sidecar write fails the data file is removed again, so a data
    file never exists without its sidecar.

    Args:
        data: Payload (bytes or text)
        sidecar: Sidecar text
        data_path: Path of the payload file
        sidecar_path: Path of the sidecar file

    Returns:
        Dictionary with combined write results

    Raises:
        AtomicWriteError: If either write fails
    """
    payload = data.encode('utf-8') if isinstance(data, str) else data

    data_result = write_bytes_atomic(payload, data_path)
    if data_result['status'] != 'completed':
        raise AtomicWriteError(f"Data write failed for {data_path}: {data_result['error']}")

    sidecar_result = write_text_atomic(sidecar, sidecar_path)
    if sidecar_result['status'] != 'completed':
        try:
            Path(data_path).unlink()
        except OSError:
            pass
        raise AtomicWriteError(
            f"Sidecar write failed for {sidecar_path}: {sidecar_result['error']}"
        )

    return {
        'status': 'completed',
        'data_path': str(data_path),
        'sidecar_path': str(sidecar_path),
        'data_bytes': data_result['bytes_written'],
        'sidecar_bytes': sidecar_result['bytes_written'],
    }
