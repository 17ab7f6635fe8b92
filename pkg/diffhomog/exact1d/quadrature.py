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

Composite Gauss-Legendre rules on partitions aligned with breakpoints.
"""

__all__ = ['gauss_legendre', 'composite_rule', 'interval_rule', 'reference_cuts', 's_cuts']

from functools import lru_cache

import numpy as np

from diffhomog.util.config import CONFIG

MERGE_TOL = 1e-12
"""Cuts closer than this (relative to max(1, |s|)) are merged"""


def _order(order):
    return CONFIG.diffhomog.quadrature.gauss_order.int() if order is None else int(order)


@lru_cache(maxsize=16)
def gauss_legendre(order):
    """Nodes and weights of the Gauss-Legendre rule on [-1, 1]."""
    if order < 1:
        raise ValueError(f"quadrature order must be positive, got {order}")
    nodes, weights = np.polynomial.legendre.leggauss(order)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def interval_rule(starts, ends, order=None):
    """Gauss-Legendre points and weights on each interval [starts[i], ends[i]].

    Reversed intervals get negative weights, so that sums are oriented integrals.

    Returns
    -------
    points, weights : np.ndarray
        Both of shape (n_intervals, order).
    """
    nodes, weights = gauss_legendre(_order(order))
    starts = np.asarray(starts, dtype=float)[..., None]
    ends = np.asarray(ends, dtype=float)[..., None]
    half = 0.5 * (ends - starts)
    return 0.5 * (ends + starts) + half * nodes, half * weights


def composite_rule(cuts, order=None):
    """Composite rule over consecutive cuts, see interval_rule."""
    cuts = np.asarray(cuts, dtype=float)
    return interval_rule(cuts[:-1], cuts[1:], order)


def reference_cuts(*breakpoint_sets, subdivisions=None):
    """Sorted union of breakpoint sets within [0, 1) and a uniform subdivision of [0, 1).

    Parameters
    ----------
    *breakpoint_sets : array_like
        Abscissae of discontinuities or kinks, taken modulo 1.
    subdivisions : int, optional
        Number of equal pieces every unit cell is split into at least.
        Default from CONFIG.
    """
    if subdivisions is None:
        subdivisions = CONFIG.diffhomog.quadrature.subdivisions.int()
    if subdivisions < 1:
        raise ValueError(f"subdivisions must be positive, got {subdivisions}")
    pts = np.concatenate([np.arange(subdivisions) / subdivisions]
                         + [np.mod(np.asarray(b, dtype=float).ravel(), 1.0)
                            for b in breakpoint_sets])
    return _merge(np.unique(pts))


def _merge(cuts):
    if cuts.size < 2:
        return cuts
    keep = np.concatenate([[True], np.diff(cuts) > MERGE_TOL * np.maximum(1.0, np.abs(cuts[1:]))])
    return cuts[keep]


def s_cuts(ref, s_lo, s_hi, extra=()):
    """Cuts of [s_lo, s_hi] at k + ref for every integer k, plus extra points.

    Parameters
    ----------
    ref : np.ndarray
        Reference cuts in [0, 1), see reference_cuts.
    s_lo, s_hi : float
        Ends of the partitioned interval, s_lo < s_hi.
    extra : array_like, optional
        Further cut points, those outside (s_lo, s_hi) are ignored.

    Returns
    -------
    np.ndarray
        Strictly increasing cuts starting at s_lo and ending at s_hi.
    """
    if not s_hi > s_lo:
        raise ValueError(f"empty interval [{s_lo}, {s_hi}]")
    cells = np.arange(np.floor(s_lo), np.ceil(s_hi) + 1)
    pts = (cells[:, None] + np.asarray(ref, dtype=float)[None, :]).ravel()
    pts = np.concatenate([pts, np.asarray(extra, dtype=float).ravel()])
    inner = pts[(pts > s_lo) & (pts < s_hi)]
    cuts = _merge(np.unique(np.concatenate([[s_lo], inner, [s_hi]])))
    # merging keeps the left member of a close pair
    cuts[-1] = s_hi
    return cuts
