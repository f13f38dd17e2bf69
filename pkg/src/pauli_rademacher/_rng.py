"""Keyed random substreams.

Every stream is a Philox (counter-based) generator seeded by
``SeedSequence(seed, spawn_key=keys)``, so the numbers a worker sees depend
only on ``(seed, keys)`` and never on scheduling or thread count.
"""
import numpy as np

# fixed sub-keys, kept stable so outputs remain reproducible across versions
DATA = 0
THETA = 1
MODEL = 2
INIT = 3
PERTURB = 4
TEST = 5


def substream(seed: int, *keys: int) -> np.random.Generator:
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.Philox(ss))


def as_generator(random_state) -> np.random.Generator:
    """Accept ``None``, an int seed or a Generator."""
    if isinstance(random_state, np.random.Generator):
        return random_state
    if random_state is None:
        return np.random.default_rng()
    return substream(int(random_state))
