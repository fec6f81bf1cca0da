"""Deterministic derivation of independent RNG streams.

Every stochastic component takes an explicit numpy Generator. Child streams
are derived from a base seed plus a path of labels (purpose, condition
index, episode index, ...) so results never depend on scheduling order.
String labels hash to stable integers, so stream identities survive
refactors that reorder call sites.
"""

from __future__ import annotations

import hashlib

import numpy as np


def _as_int(part) -> int:
    if isinstance(part, str):
        digest = hashlib.sha256(part.encode("utf-8")).digest()
        return int.from_bytes(digest[:8], "big")
    return int(part)


def seed_sequence(base_seed: int, *path) -> np.random.SeedSequence:
    return np.random.SeedSequence(
        (int(base_seed),) + tuple(_as_int(p) for p in path))


def rng_for(base_seed: int, *path) -> np.random.Generator:
    return np.random.default_rng(seed_sequence(base_seed, *path))


def int_seed(base_seed: int, *path) -> int:
    """A derived 63-bit integer seed, for APIs that want a plain int."""
    return int(seed_sequence(base_seed, *path).generate_state(1, np.uint64)[0] >> 1)
