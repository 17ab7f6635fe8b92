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

Approximate homogenized matrix A_star_N from the correctors on Q_N.
"""

__all__ = ['HomogenizedEstimate', 'alpha_beta', 'estimate_A_star']

import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from diffhomog.corrector_fem.coefficients import sample_coefficients
from diffhomog.corrector_fem.solver import assemble_system, solve_corrector

LOGGER = logging.getLogger(__name__)


@dataclass
class HomogenizedEstimate:
    """A_star_N of one realization with the matrices alpha_N and beta_N.

    Attributes
    ----------
    n_cells : int
        N.
    seed : int or None
        Seed of the diffeomorphism.
    alpha : np.ndarray
        |Q_N|^{-1} int grad phi.
    beta : np.ndarray
        |Q_N|^{-1} int det(grad phi) (grad phi)^{-1}.
    b_star : np.ndarray
        |Q_N|^{-1} int det(grad phi) A_per (e_j + (grad phi)^{-T} grad w_j) in column j.
    a_star : np.ndarray
        b_star / det(alpha).
    mean_det : float
        |Q_N|^{-1} int det(grad phi) by element quadrature.
    residuals : list of float
        Achieved relative residuals of the corrector solves.
    """
    n_cells: int
    seed: Optional[int]
    alpha: np.ndarray
    beta: np.ndarray
    b_star: np.ndarray
    a_star: np.ndarray
    mean_det: float
    residuals: List[float] = field(default_factory=list)

    @property
    def dim(self):
        return self.a_star.shape[0]

    @property
    def det_alpha(self):
        return float(np.linalg.det(self.alpha))

    @property
    def asymmetry(self):
        """Largest entry of |A_star_N - A_star_N^T|."""
        return float(np.max(np.abs(self.a_star - self.a_star.T)))

    @property
    def min_eig(self):
        """Smallest eigenvalue of the symmetric part of A_star_N."""
        return float(np.min(np.linalg.eigvalsh(0.5 * (self.a_star + self.a_star.T))))

    @property
    def max_eig(self):
        return float(np.max(np.linalg.eigvalsh(0.5 * (self.a_star + self.a_star.T))))

    @property
    def transported(self):
        """beta_N A_star_N alpha_N^{-T}."""
        return self.beta @ self.a_star @ np.linalg.inv(self.alpha).T

    @property
    def transported_min_eig(self):
        """Smallest eigenvalue of the symmetric part of the transported matrix."""
        mat = self.transported
        return float(np.min(np.linalg.eigvalsh(0.5 * (mat + mat.T))))


def alpha_beta(diffeo, n_cells):
    """alpha_N and beta_N of a tensorized diffeomorphism, in closed form.

    The mean of phi_i' over (0, N) is (phi_i(N) - phi_i(0)) / N, a sum of whole
    cell increments. For the diagonal gradient, beta_N is the adjugate of alpha_N.

    Parameters
    ----------
    diffeo : TensorDiffeoField
    n_cells : int
        N >= 1.

    Returns
    -------
    alpha, beta : np.ndarray
        Diagonal d x d matrices.
    """
    n_cells = int(n_cells)
    if n_cells < 1:
        raise ValueError(f"need N >= 1, got {n_cells}")
    means = np.array([(comp.phi(float(n_cells)) - comp.phi(0.0)) / n_cells
                      for comp in diffeo.components], dtype=float)
    others = np.array([np.prod(np.delete(means, axis)) for axis in range(means.size)])
    return np.diag(means), np.diag(others)


def estimate_A_star(mesh, diffeo, a_per, tol=None, coeff=None):
    """Approximate homogenized matrix from the correctors of all basis directions.

    Parameters
    ----------
    mesh : PeriodicMesh
    diffeo : TensorDiffeoField
    a_per : PeriodicMatrixField
    tol : float, optional
        Solver tolerance. Default from CONFIG.
    coeff : CoefficientSample, optional
        Reused when given.

    Returns
    -------
    HomogenizedEstimate

    Raises
    ------
    RuntimeError
        On a singular alpha_N or a failed corrector solve.
    """
    if coeff is None:
        coeff = sample_coefficients(mesh, diffeo, a_per)
    system = assemble_system(mesh, coeff)
    weights = mesh.quad_weights
    b_star = np.empty((mesh.dim, mesh.dim))
    residuals = []
    for j in range(mesh.dim):
        sol = solve_corrector(mesh, coeff, j, tol=tol, system=system)
        residuals.append(sol.residual)
        # e_j + (grad phi)^{-T} grad w_j at every quadrature point
        grad = np.eye(mesh.dim)[j] + np.einsum('eqji,eqj->eqi', coeff.inv_grad, sol.gradient())
        flux = np.einsum('eq,eqij,eqj->i', coeff.det * weights, coeff.a_per, grad)
        b_star[:, j] = flux / mesh.volume
    alpha, beta = alpha_beta(diffeo, mesh.n_cells)
    det_alpha = float(np.linalg.det(alpha))
    if not det_alpha > 0:
        raise RuntimeError(f"alpha_N is singular, det={det_alpha}")
    mean_det = float(np.sum(coeff.det * weights) / mesh.volume)
    LOGGER.debug("A_star_N for N=%d: %s", mesh.n_cells, b_star.ravel() / det_alpha)
    return HomogenizedEstimate(
        n_cells=mesh.n_cells,
        seed=diffeo.seed,
        alpha=alpha,
        beta=beta,
        b_star=b_star,
        a_star=b_star / det_alpha,
        mean_det=mean_det,
        residuals=residuals,
    )
