"""
Seed derivation: one root seed, one independent generator per stage label.
"""

import hashlib
from typing import Optional

import numpy as np


def label_key(label: str) -> int:
    """Stable 64-bit integer for a stage label."""
    return int.from_bytes(hashlib.sha256(label.encode('utf-8')).digest()[:8], 'little')


def derive_seed(root_seed: int, label: str) -> int:
    """Integer seed for `label`, reproducible from the root seed."""
    seq = np.random.SeedSequence([int(root_seed), label_key(label)])
    return int(seq.generate_state(1, dtype=np.uint32)[0])


def derive_rng(root_seed: int, label: str, index: Optional[int] = None) -> np.random.Generator:
    """
    Independent generator for a labelled stage.

    Args:
        root_seed: Run-wide seed
        label: Stage name, e.g. 'bo.initial' or 'uq.samples'
        index: Optional counter for repeated draws under one label

    Returns:
        numpy Generator
    """
    entropy = [int(root_seed), label_key(label)]
    if index is not None:
        entropy.append(int(index))
    return np.random.default_rng(np.random.SeedSequence(entropy))
