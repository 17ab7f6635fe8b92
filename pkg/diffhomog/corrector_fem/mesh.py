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

Uniform tensor-product meshes of the periodic torus Q_N = (0, N)^d.

Nodes, elements, local nodes and quadrature points are all numbered with the
first axis running fastest. A node with multi-index i on the torus carries the
degree of freedom i_1 + n i_2 with n = N r nodes per side, so that opposite
faces share their unknowns.
"""

__all__ = ['PeriodicMesh', 'build_mesh']

import itertools
import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from diffhomog.util.config import CONFIG

LOGGER = logging.getLogger(__name__)

GAUSS_POINTS_01 = np.array([0.5 - 0.5 / np.sqrt(3.0), 0.5 + 0.5 / np.sqrt(3.0)])
"""Two-point Gauss-Legendre nodes on [0, 1]"""


def _multi_indices(dim):
    """All multi-indices in {0, 1}^dim, first axis fastest."""
    return np.array([idx[::-1] for idx in itertools.product((0, 1), repeat=dim)], dtype=int)


@dataclass(frozen=True)
class PeriodicMesh:
    """Q1 mesh of (0, N)^d with r elements per unit cell and side.

    Attributes
    ----------
    dim : int
        Space dimension d in {1, 2}.
    n_cells : int
        Number N of unit cells per side.
    r : int
        Elements per unit cell and side, the element size is 1 / r.
    """
    dim: int
    n_cells: int
    r: int

    @property
    def n_side(self):
        """Elements, and nodes after identification, per side."""
        return self.n_cells * self.r

    @property
    def h(self):
        return 1.0 / self.r

    @property
    def n_dofs(self):
        return self.n_side ** self.dim

    @property
    def n_elements(self):
        return self.n_side ** self.dim

    @property
    def volume(self):
        """|Q_N|."""
        return float(self.n_cells ** self.dim)

    def _unravel(self, flat):
        return np.stack(np.unravel_index(flat, (self.n_side,) * self.dim, order='F'), axis=-1)

    def dof_of(self, index):
        """DOF of node multi-indices of shape (..., d), taken modulo the torus."""
        index = np.mod(np.asarray(index, dtype=np.int64), self.n_side)
        return np.ravel_multi_index(tuple(np.moveaxis(index, -1, 0)), (self.n_side,) * self.dim,
                                    order='F')

    @cached_property
    def local_nodes(self):
        """Corner offsets of the 2^d local nodes, shape (2^d, d)."""
        return _multi_indices(self.dim)

    @cached_property
    def element_origins(self):
        """Node multi-index of the lower corner of every element, shape (n_elements, d)."""
        return self._unravel(np.arange(self.n_elements))

    @cached_property
    def element_dofs(self):
        """DOFs of the local nodes of every element, shape (n_elements, 2^d)."""
        return self.dof_of(self.element_origins[:, None, :] + self.local_nodes[None, :, :])

    @cached_property
    def node_coords(self):
        """Coordinates of the DOF nodes in [0, N)^d, shape (n_dofs, d)."""
        return self._unravel(np.arange(self.n_dofs)) * self.h

    @cached_property
    def quad_points(self):
        """Tensor Gauss points of every element, shape (n_elements, 2^d, d)."""
        ref = GAUSS_POINTS_01[_multi_indices(self.dim)]
        return (self.element_origins[:, None, :] + ref[None, :, :]) * self.h

    @cached_property
    def quad_weights(self):
        """Weights of the 2^d points of one element, they sum to h^d."""
        return np.full(2 ** self.dim, (0.5 * self.h) ** self.dim)

    @cached_property
    def shape_values(self):
        """Local basis functions at the quadrature points, shape (2^d, 2^d)."""
        ref = GAUSS_POINTS_01[_multi_indices(self.dim)]
        corners = self.local_nodes
        factors = np.where(corners[None, :, :] == 1, ref[:, None, :], 1.0 - ref[:, None, :])
        return np.prod(factors, axis=-1)

    @cached_property
    def shape_gradients(self):
        """Gradients of the local basis at the quadrature points, shape (2^d, 2^d, d)."""
        ref = GAUSS_POINTS_01[_multi_indices(self.dim)]
        corners = self.local_nodes
        factors = np.where(corners[None, :, :] == 1, ref[:, None, :], 1.0 - ref[:, None, :])
        slopes = np.where(corners == 1, 1.0, -1.0) / self.h
        grads = np.empty(factors.shape)
        for axis in range(self.dim):
            others = np.delete(factors, axis, axis=-1)
            grads[..., axis] = slopes[None, :, axis] * np.prod(others, axis=-1)
        return grads


def build_mesh(dim, n_cells, r=None):
    """Periodic mesh of Q_N with N = n_cells.

    Parameters
    ----------
    dim : int
        1 or 2.
    n_cells : int
        N >= 1.
    r : int, optional
        Elements per unit cell and side, r >= 1. Default from CONFIG.

    Returns
    -------
    PeriodicMesh

    Raises
    ------
    ValueError
        On invalid sizes or more DOFs than CONFIG fem.max_dofs.
    """
    if r is None:
        r = CONFIG.diffhomog.fem.r.int()
    if dim not in (1, 2):
        raise ValueError(f"dimension must be in {{1, 2}}, got {dim}")
    if int(n_cells) != n_cells or n_cells < 1 or int(r) != r or r < 1:
        raise ValueError(f"need integers N >= 1 and r >= 1, got N={n_cells}, r={r}")
    n_dofs = (int(n_cells) * int(r)) ** dim
    max_dofs = CONFIG.diffhomog.fem.max_dofs.int()
    if n_dofs > max_dofs:
        raise ValueError(f"mesh with {n_dofs} DOFs exceeds the limit of {max_dofs}")
    LOGGER.debug("Periodic mesh d=%d, N=%d, r=%d with %d DOFs.", dim, n_cells, r, n_dofs)
    return PeriodicMesh(int(dim), int(n_cells), int(r))
