"""
Named random sub-streams.

All randomness of a run flows from one integer seed; each component draws from
its own stream so it can be reproduced without replaying the others.
"""

import numpy as np

from .hashing import fnv1a_64


def named_seed(seed: int, name: str) -> int:
    """Derive an independent 63-bit seed for the stream `name`."""
    stream_key = fnv1a_64(name.encode("utf-8")) & 0xFFFFFFFF
    sequence = np.random.SeedSequence(entropy=[int(seed) & 0xFFFFFFFF, stream_key])
    return int(sequence.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def named_generator(seed: int, name: str) -> np.random.Generator:
    """Generator for the stream `name` under the run seed."""
    return np.random.default_rng(named_seed(seed, name))
