"""Seeded, splittable random streams.

Every stream is a Philox counter-based generator keyed by a master seed and a
tuple of integer keys, so replication ``r`` of a study always draws from
``stream(seed, r)`` regardless of how replications are scheduled.
"""

import os

import numpy as np

from ._validation import InvalidArgumentError

SEED_ENV = "COPULA_PROC_SEED"
DEFAULT_SEED = 20140101


def default_seed():
    """Seed from ``COPULA_PROC_SEED`` if set, else a fixed library default."""
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw.strip() == "":
        return DEFAULT_SEED
    try:
        return check_seed(int(raw, 0))
    except ValueError:
        raise InvalidArgumentError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def check_seed(seed):
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise InvalidArgumentError("seed must be an unsigned 64-bit integer")
    return seed


def stream(seed, *keys):
    """Independent generator for ``(seed, *keys)``."""
    ss = np.random.SeedSequence(check_seed(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.Philox(ss))
