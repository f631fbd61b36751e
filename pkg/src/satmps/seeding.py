"""Counter-based seed derivation.

All sweeps derive per-instance seeds from a master seed through
``SeedSequence(master, spawn_key=path)``. Adding instances to a sweep
never reshuffles the seeds of earlier ones, and reruns are bit-identical.
"""

from __future__ import annotations

import numpy as np


def child_seed(master: int, *path: int) -> int:
    """Deterministic 64-bit child seed for a (master, counter...) path."""
    ss = np.random.SeedSequence(master, spawn_key=tuple(path))
    return int(ss.generate_state(1, np.uint64)[0])


def child_rng(master: int, *path: int) -> np.random.Generator:
    return np.random.default_rng(child_seed(master, *path))
