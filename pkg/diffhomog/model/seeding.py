"""
This file is part of diffhomog.

Copyright (C) 2024 diffhomog contributors listed in AUTHORS.md.

diffhomog is free software: you can redistribute it and/or modify it under the
terms of the GNU General Public License as published by the Free
Software Foundation, version 3.

diffhomog is distributed in the hope that it will be useful, but WITHOUT ANY
WARRANTY; without even the implied warranty of MERCHANTABILITY or FITNESS FOR A
PARTICULAR PURPOSE.  See the GNU General Public License for more details.

You should have received a copy of the GNU General Public License along
with diffhomog. If not, see <https://www.gnu.org/licenses/>.

---

Stateless, counter-based seeding.

Every random number of the package is a pure function of a master seed and an
integer counter (a cell index or a realization index). The hash is the
SplitMix64 generator evaluated at position k of the stream keyed by the seed,
so ranges can be extended lazily and realizations can be farmed out to any
number of workers without changing a single bit of the result.
"""

__all__ = ['validate_seed', 'hash_indices', 'uniforms', 'stream_seed']

import numpy as np

from diffhomog.util.constants import (SEED_GAMMA, SEED_MIX_1, SEED_MIX_2, STREAM_SALT,
                                      UNIT_INTERVAL_BITS)


def validate_seed(seed):
    """Check that seed is an unsigned 64-bit integer and return it as int."""
    if isinstance(seed, (bool, np.bool_)) or not isinstance(seed, (int, np.integer)):
        raise ValueError(f"seed must be an integer in [0, 2**64), got {seed!r}")
    seed = int(seed)
    if not 0 <= seed < 2 ** 64:
        raise ValueError(f"seed must be an integer in [0, 2**64), got {seed}")
    return seed


def _finalize(z):
    z = (z ^ (z >> np.uint64(30))) * SEED_MIX_1
    z = (z ^ (z >> np.uint64(27))) * SEED_MIX_2
    return z ^ (z >> np.uint64(31))


def hash_indices(seed, indices):
    """64-bit hashes of (seed, k) for every k in indices.

    Parameters
    ----------
    seed : int
        Master seed in [0, 2**64).
    indices : array_like of int
        Signed counters.

    Returns
    -------
    np.ndarray of uint64
    """
    seed = validate_seed(seed)
    counters = np.atleast_1d(np.asarray(indices, dtype=np.int64)).astype(np.int64).view(np.uint64)
    with np.errstate(over='ignore'):
        key = _finalize(np.array([seed], dtype=np.uint64) + SEED_GAMMA)
        return _finalize(key + (counters + np.uint64(1)) * SEED_GAMMA)


def uniforms(seed, indices):
    """Uniform numbers in [0, 1), one per index, from the top 53 bits of the hash."""
    bits = hash_indices(seed, indices) >> np.uint64(64 - UNIT_INTERVAL_BITS)
    return bits.astype(np.float64) * 2.0 ** -UNIT_INTERVAL_BITS


def stream_seed(seed, index):
    """Seed of the sub-stream number index of a master seed, e.g. of one realization."""
    salted = validate_seed(seed) ^ int(STREAM_SALT)
    return int(hash_indices(salted, [index])[0])
