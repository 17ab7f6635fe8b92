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

Define constants.
"""

__all__ = ['SEED_GAMMA',
           'SEED_MIX_1',
           'SEED_MIX_2',
           'STREAM_SALT',
           'UNIT_INTERVAL_BITS']

import numpy as np

SEED_GAMMA = np.uint64(0x9E3779B97F4A7C15)
"""Weyl increment of the SplitMix64 sequence (odd 64-bit golden ratio)"""

SEED_MIX_1 = np.uint64(0xBF58476D1CE4E5B9)
"""First multiplier of the SplitMix64 output finalizer"""

SEED_MIX_2 = np.uint64(0x94D049BB133111EB)
"""Second multiplier of the SplitMix64 output finalizer"""

STREAM_SALT = np.uint64(0xD1B54A32D192ED03)
"""Xored into a master seed before deriving realization seeds, so that
realization seeds and cell draws of the same master seed never coincide"""

UNIT_INTERVAL_BITS = 53
"""Number of high bits of a 64-bit hash used to form a uniform in [0, 1)"""

