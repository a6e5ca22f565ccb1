"""Deterministic, order-independent random streams.

Every stochastic routine in the package takes an integer seed and derives
its generator through :func:`derive_rng`.  Sub-streams (per path, per
particle block, per suite) are obtained by extending the key tuple, which
maps onto numpy's ``SeedSequence(spawn_key=...)`` splitting.  Two runs with
the same master seed therefore produce identical output regardless of the
order in which paths are generated.
"""

from __future__ import annotations

import numpy as np

__all__ = ["derive_rng", "spawn_seedseq"]


def spawn_seedseq(master_seed: int, *key: int) -> np.random.SeedSequence:
    """SeedSequence for stream ``key`` under ``master_seed``.

    The key is a tuple of non-negative integers (e.g. ``(stream_id,
    path_index)``); distinct keys give statistically independent streams.
    """
    if master_seed < 0:
        raise ValueError(f"seed must be non-negative, got {master_seed}")
    return np.random.SeedSequence(entropy=master_seed, spawn_key=tuple(key))


def derive_rng(master_seed: int, *key: int) -> np.random.Generator:
    """Generator for the sub-stream ``key`` of ``master_seed``."""
    return np.random.default_rng(spawn_seedseq(master_seed, *key))
