"""Counter-based per-sample random streams.

Sample ``idx`` under master seed ``s`` always sees the same Philox stream,
whatever the chunking or worker count.
"""
from __future__ import annotations

import os

import numpy as np

DEFAULT_SEED = 20240611


def master_seed(seed: int | None = None) -> int:
    if seed is not None:
        return int(seed)
    env = os.environ.get("QL_SEED")
    return int(env) if env else DEFAULT_SEED


def stream_key(seed: int, purpose: int = 0) -> np.ndarray:
    return np.random.SeedSequence([int(seed), int(purpose)]).generate_state(2, np.uint64)


def sample_rng(key, idx: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=key, counter=[0, int(idx), 0, 0]))


def uniform_sphere(rng: np.random.Generator, d: int) -> np.ndarray:
    v = rng.standard_normal(d)
    return v / np.linalg.norm(v)
