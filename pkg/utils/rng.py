"""
Counter-based random streams.

Every random draw in the package comes from a stream addressed by a path,
e.g. ``stream(seed, "noise", n_index, replication)``. The path is hashed by
``numpy.random.SeedSequence`` into a Philox key, so a stream's content depends
only on (seed, path), never on which thread asks for it or in what order.
"""

from __future__ import annotations

import hashlib

import numpy as np

_PURPOSES: dict[str, int] = {}


def _purpose_code(purpose: str) -> int:
    code = _PURPOSES.get(purpose)
    if code is None:
        code = int.from_bytes(hashlib.sha256(purpose.encode()).digest()[:4], "little")
        _PURPOSES[purpose] = code
    return code


def stream(seed: int, purpose: str, *indices: int) -> np.random.Generator:
    """Return an independent Philox generator for (seed, purpose, *indices)."""
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    path = (_purpose_code(purpose),) + tuple(int(i) for i in indices)
    seq = np.random.SeedSequence(entropy=int(seed), spawn_key=path)
    return np.random.Generator(np.random.Philox(seq))
