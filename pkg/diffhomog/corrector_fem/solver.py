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

Galerkin solver of the periodic corrector problem on Q_N.

Find w periodic with mean zero such that for every periodic test function v

    int det(grad phi) grad v^T (grad phi)^{-1} A_per (p + (grad phi)^{-T} grad w) = 0.
"""

__all__ = ['CorrectorSystem', 'CorrectorSolution', 'assemble_system', 'solve_corrector', 'pcg']

import logging
import math
from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy import sparse

from diffhomog.util.config import CONFIG

LOGGER = logging.getLogger(__name__)


@dataclass
class CorrectorSystem:
    """Assembled stiffness matrix of one coefficient sample.

    Attributes
    ----------
    mesh : PeriodicMesh
    coeff : CoefficientSample
    matrix : scipy.sparse.csr_matrix
        Symmetric positive semidefinite, constants span its kernel.
    """
    mesh: object
    coeff: object
    matrix: sparse.csr_matrix

    def rhs(self, direction):
        """Load vector -int det grad v^T (grad phi)^{-1} A_per p and its magnitude.

        The magnitude is the norm of the load assembled from absolute element
        contributions, a scale that survives cancellation between elements.
        """
        mesh = self.mesh
        flux = self.coeff.flux(direction)
        local = -np.einsum('q,qlk,eqk->el', mesh.quad_weights, mesh.shape_gradients, flux)
        dofs = mesh.element_dofs.ravel()
        load = np.bincount(dofs, weights=local.ravel(), minlength=mesh.n_dofs)
        scale = np.bincount(dofs, weights=np.abs(local).ravel(), minlength=mesh.n_dofs)
        return load, float(np.linalg.norm(scale))


def assemble_system(mesh, coeff):
    """Assemble the stiffness matrix of the deformed corrector problem.

    Parameters
    ----------
    mesh : PeriodicMesh
    coeff : CoefficientSample

    Returns
    -------
    CorrectorSystem
    """
    local = np.einsum('q,qlk,eqkj,qmj->elm', mesh.quad_weights, mesh.shape_gradients,
                      coeff.effective, mesh.shape_gradients)
    n_local = mesh.element_dofs.shape[1]
    rows = np.repeat(mesh.element_dofs, n_local, axis=1).ravel()
    cols = np.tile(mesh.element_dofs, (1, n_local)).ravel()
    matrix = sparse.coo_matrix((local.ravel(), (rows, cols)),
                               shape=(mesh.n_dofs, mesh.n_dofs)).tocsr()
    LOGGER.debug("Assembled %d x %d system with %d nonzeros.",
                 mesh.n_dofs, mesh.n_dofs, matrix.nnz)
    return CorrectorSystem(mesh, coeff, matrix)


def _project(vec):
    return vec - math.fsum(vec) / vec.size


def pcg(matrix, rhs, target, max_iter):
    """Jacobi-preconditioned conjugate gradients on the mean-zero subspace.

    Parameters
    ----------
    matrix : scipy.sparse matrix
        Symmetric, positive definite on vectors of mean zero.
    rhs : np.ndarray
        Load vector of mean zero.
    target : float
        Stop once the residual norm is at most target.
    max_iter : int

    Returns
    -------
    solution : np.ndarray
        Mean-zero iterate.
    residual : float
        Norm of rhs - matrix @ solution.
    iterations : int

    Raises
    ------
    RuntimeError
        When the residual does not reach target within max_iter iterations.
    """
    inv_diag = 1.0 / matrix.diagonal()
    sol = np.zeros(rhs.size)
    res = _project(rhs)
    res_norm = np.linalg.norm(res)
    if res_norm <= target:
        return sol, float(res_norm), 0
    prec = inv_diag * res
    direction = prec.copy()
    rho = res @ prec
    for k in range(1, max_iter + 1):
        m_dir = matrix @ direction
        step = rho / (direction @ m_dir)
        sol = _project(sol + step * direction)
        res = res - step * m_dir
        res_norm = np.linalg.norm(res)
        if res_norm <= target:
            # recompute to rule out drift of the recursive residual
            res_norm = np.linalg.norm(rhs - matrix @ sol)
            if res_norm <= target:
                return sol, float(res_norm), k
        prec = inv_diag * res
        rho_new = res @ prec
        direction = prec + (rho_new / rho) * direction
        rho = rho_new
    raise RuntimeError(f"conjugate gradients did not converge in {max_iter} iterations, "
                       f"residual {res_norm:.3e} > target {target:.3e}")


@dataclass
class CorrectorSolution:
    """Mean-zero periodic corrector of one direction.

    Attributes
    ----------
    mesh : PeriodicMesh
    direction : np.ndarray
        The constant vector p.
    values : np.ndarray
        Nodal values, one per DOF.
    residual : float
        Achieved residual relative to the load scale.
    iterations : int
    """
    mesh: object
    direction: np.ndarray
    values: np.ndarray
    residual: float
    iterations: int

    @property
    def mean(self):
        return math.fsum(self.values) / self.values.size

    def gradient(self):
        """grad w at the quadrature points, shape (n_elements, 2^d, d)."""
        return np.einsum('qlk,el->eqk', self.mesh.shape_gradients,
                         self.values[self.mesh.element_dofs])

    def evaluate(self, points):
        """Q1 interpolant of the nodal values at points of shape (n, d), periodic in Q_N."""
        mesh = self.mesh
        scaled = np.mod(np.asarray(points, dtype=float), mesh.n_cells) / mesh.h
        origin = np.minimum(np.floor(scaled).astype(np.int64), mesh.n_side - 1)
        local = scaled - origin
        corners = mesh.local_nodes
        basis = np.prod(np.where(corners[None, :, :] == 1, local[:, None, :],
                                 1.0 - local[:, None, :]), axis=-1)
        dofs = mesh.dof_of(origin[:, None, :] + corners[None, :, :])
        return np.sum(basis * self.values[dofs], axis=-1)

    def to_dataframe(self):
        """Nodal values with coordinates, columns x1, (x2,) w."""
        coords = self.mesh.node_coords
        data = {f'x{axis + 1}': coords[:, axis] for axis in range(self.mesh.dim)}
        data['w'] = self.values
        return pd.DataFrame(data)


def _direction(dim, direction):
    if np.ndim(direction) == 0:
        if int(direction) != direction or not 0 <= direction < dim:
            raise ValueError(f"direction index must be in [0, {dim}), got {direction}")
        return np.eye(dim)[int(direction)]
    vec = np.asarray(direction, dtype=float)
    if vec.shape != (dim,):
        raise ValueError(f"direction must have {dim} entries, got shape {vec.shape}")
    return vec


def solve_corrector(mesh, coeff, direction, tol=None, system=None):
    """Solve the corrector problem for one direction p.

    Parameters
    ----------
    mesh : PeriodicMesh
    coeff : CoefficientSample
    direction : int or array_like
        Index j of the basis vector e_j, or the vector p itself.
    tol : float, optional
        Residual bound relative to the load scale. Default from CONFIG.
    system : CorrectorSystem, optional
        Reused when given, otherwise assembled here.

    Returns
    -------
    CorrectorSolution

    Raises
    ------
    RuntimeError
        When the iterative solve does not converge.
    """
    if tol is None:
        tol = CONFIG.diffhomog.fem.tol.float()
    p_vec = _direction(mesh.dim, direction)
    if system is None:
        system = assemble_system(mesh, coeff)
    load, scale = system.rhs(p_vec)
    max_iter = int(math.ceil(CONFIG.diffhomog.fem.iter_factor.int() * math.sqrt(mesh.n_dofs)))
    values, residual, iterations = pcg(system.matrix, load, tol * scale, max_iter)
    relative = residual / scale if scale > 0 else 0.0
    LOGGER.debug("Corrector p=%s solved in %d iterations, relative residual %.3e.",
                  p_vec, iterations, relative)
    return CorrectorSolution(mesh, p_vec, values, relative, iterations)
