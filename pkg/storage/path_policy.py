"""
Filename and path policy for pipeline artifacts.
Paths are a pure function of the output directory, the stage and an index,
never of the wall clock, so reruns overwrite the same files.
"""

import re
from pathlib import Path
from typing import Dict

from utils.errors import ConfigurationError

STAGES = ('simulate', 'sample_bo', 'sample_lhs', 'sample_compare', 'bundle', 'predict', 'uq',
          'sobol', 'di', 'plot_data')

SNAPSHOT_SUFFIX = '.roms'


class PathPolicyError(ConfigurationError):
    """Raised when path policy validation fails."""
    pass


def stage_dir(output_dir: Path, stage: str) -> Path:
    """
    Directory holding one stage's artifacts.

    Args:
        output_dir: Root output directory
        stage: One of STAGES

    Returns:
        Stage directory path (not created)

    Raises:
        PathPolicyError: If the stage is unknown
    """
    if stage not in STAGES:
        raise PathPolicyError(f"Unknown stage: {stage}. Valid: {', '.join(STAGES)}")
    return Path(output_dir) / stage


def sample_stage(mode: str) -> str:
    """Stage name of a training-set directory for a sampling mode."""
    normalized = _normalize_label(mode)
    stage = f'sample_{normalized}'
    if stage not in STAGES:
        raise PathPolicyError(f"Unknown sampling mode: {mode}")
    return stage


def snapshot_path(directory: Path, index: int, prefix: str = 'snapshot') -> Path:
    """
    Path of the index-th snapshot file in a directory.

    Args:
        directory: Parent directory
        index: Zero-based index
        prefix: File name prefix

    Returns:
        e.g. <directory>/snapshot_0003.roms
    """
    if index < 0:
        raise PathPolicyError(f"Snapshot index must be >= 0, got {index}")
    return Path(directory) / f'{_normalize_label(prefix)}_{index:04d}{SNAPSHOT_SUFFIX}'


def training_set_paths(set_dir: Path) -> Dict[str, Path]:
    """
    All paths inside a training-set directory.

    Returns:
        Dictionary with training/test snapshot dirs, basis files and CSVs
    """
    set_dir = Path(set_dir)
    return {
        'root': set_dir,
        'training_dir': set_dir / 'training',
        'test_dir': set_dir / 'test',
        'basis': set_dir / 'basis.roms',
        'singular_values': set_dir / 'basis_singular_values.roms',
        'training_set_csv': set_dir / 'training_set.csv',
        'test_set_csv': set_dir / 'test_set.csv',
        'labels_csv': set_dir / 'labels.csv',
        'trace_csv': set_dir / 'trace.csv',
        'test_errors_csv': set_dir / 'test_errors.csv',
        'comparison_csv': set_dir / 'comparison.csv',
    }


def comparison_paths(compare_dir: Path) -> Dict[str, Path]:
    """Tables of the multi-trial sampling comparison."""
    compare_dir = Path(compare_dir)
    return {
        'trials_csv': compare_dir / 'trials.csv',
        'evolution_csv': compare_dir / 'evolution.csv',
        'summary_csv': compare_dir / 'summary.csv',
    }


def _normalize_label(label: str) -> str:
    """
    Normalize a label for filesystem safety.

    Raises:
        PathPolicyError: If the label is empty or too long
    """
    if not label or not isinstance(label, str):
        raise PathPolicyError("Label cannot be empty")
    if len(label) > 40:
        raise PathPolicyError(f"Label too long (max 40 chars): {label}")
    return re.sub(r'[^a-z0-9_]', '_', label.lower())
