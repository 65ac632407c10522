"""Named, counter-based random sub-streams.

Every random draw in the package comes from a ``numpy.random.Generator``
backed by Philox, keyed on ``(seed, name)``.  Two calls with the same pair
return generators producing the same sequence, independent of the order in
which other streams were created.
"""
import hashlib

import numpy as np


def _name_key(name):
    digest = hashlib.blake2b(name.encode("utf-8"), digest_size=16).digest()
    return tuple(int.from_bytes(digest[i:i + 4], "little") for i in range(0, 16, 4))


def substream(seed, name):
    """Return the generator for sub-stream ``name`` under master ``seed``.

    >>> a = substream(7, "task/3").random()
    >>> b = substream(7, "task/3").random()
    >>> a == b
    True
    """
    if seed < 0:
        raise ValueError("seed must be a non-negative integer")
    ss = np.random.SeedSequence(int(seed), spawn_key=_name_key(name))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed, name):
    """Deterministic 63-bit child seed, used for sweep cells."""
    return int(substream(seed, name).integers(0, 2**63 - 1))
