"""
CSV report files with key=value sidecars.

Every table is written with a fixed float format and '\\n' line endings so
identical inputs give identical bytes.
"""

import logging
from pathlib import Path
from typing import Dict, Mapping

import pandas as pd

from storage.array_store import MetaValue, format_metadata, sidecar_path
from storage.atomic_writer import write_pair_atomic
from utils.errors import ArtifactIOError

logger = logging.getLogger(__name__)

DEFAULT_FLOAT_FORMAT = '%.10g'
CSV_FORMAT_VERSION = 1


class ReportWriteError(ArtifactIOError):
    """Raised when a report table cannot be rendered or read back."""
    pass


def render_csv(frame: pd.DataFrame, float_format: str = DEFAULT_FLOAT_FORMAT) -> str:
    if frame.empty and len(frame.columns) == 0:
        raise ReportWriteError("Refusing to write a table without columns")
    return frame.to_csv(index=False, float_format=float_format, lineterminator='\n')


def write_csv(path: Path, frame: pd.DataFrame, meta: Mapping[str, MetaValue],
              float_format: str = DEFAULT_FLOAT_FORMAT) -> Dict[str, object]:
    """
    Write a table and its '<path>.meta' sidecar.

    Args:
        path: Destination CSV
        frame: Table to write
        meta: Provenance entries (config_hash, seed, ...)
        float_format: printf-style float format

    Returns:
        Write result dictionary
    """
    path = Path(path)
    sidecar = dict(meta)
    sidecar.update({
        'kind': 'csv',
        'rows': len(frame),
        'columns': ','.join(str(c) for c in frame.columns),
        'format_version': CSV_FORMAT_VERSION,
    })
    result = write_pair_atomic(
        data=render_csv(frame, float_format),
        sidecar=format_metadata(sidecar),
        data_path=path,
        sidecar_path=sidecar_path(path),
    )
    logger.debug(f"Wrote {len(frame)} rows to {path}")
    return result


def read_csv(path: Path) -> pd.DataFrame:
    """
    Read a report table.

    Raises:
        ReportWriteError: If the file is missing or unparsable
    """
    path = Path(path)
    if not path.exists():
        raise ReportWriteError(f"Report table not found: {path}")
    try:
        return pd.read_csv(path)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise ReportWriteError(f"Cannot parse {path}: {e}") from e
