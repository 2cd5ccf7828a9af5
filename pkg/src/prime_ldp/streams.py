"""Seedable, splittable random streams.

Every stream is a ``numpy.random.Generator`` backed by PCG64 whose
``SeedSequence`` carries a spawn key.  Keying a stream by integers such as
``(rep, role)`` makes a replication's draws independent of the order in which
work is scheduled.
"""

import numpy as np

# Role tags used as the last element of a spawn key.
ROLE_MODEL = 0
ROLE_GRAPH = 1
ROLE_FLIP = 2
ROLE_HUNT = 3


def make_stream(seed, *key):
    """Return a generator for ``seed`` and the integer spawn ``key``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


def as_generator(rng):
    """Accept a Generator, an int seed, or None."""
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)
