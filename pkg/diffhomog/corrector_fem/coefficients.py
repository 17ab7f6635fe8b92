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

Coefficients of the deformed corrector problem at the quadrature points.
"""

__all__ = ['CoefficientSample', 'sample_coefficients']

import logging
from dataclasses import dataclass

import numpy as np

LOGGER = logging.getLogger(__name__)

INVERSE_TOL = 1e-12
"""Largest deviation of inverse times gradient from the identity"""


@dataclass
class CoefficientSample:
    """grad phi, its inverse, its determinant and A_per at every quadrature point.

    All arrays are indexed by (element, quadrature point) first.

    Attributes
    ----------
    grad : np.ndarray
        grad phi, shape (n_elements, 2^d, d, d).
    inv_grad : np.ndarray
        (grad phi)^{-1}, same shape.
    det : np.ndarray
        det grad phi, shape (n_elements, 2^d).
    a_per : np.ndarray
        A_per at the reference points, shape (n_elements, 2^d, d, d).
    """
    grad: np.ndarray
    inv_grad: np.ndarray
    det: np.ndarray
    a_per: np.ndarray

    @property
    def effective(self):
        """det grad phi (grad phi)^{-1} A_per (grad phi)^{-T}, the matrix of the bilinear form."""
        return (self.det[..., None, None]
                * self.inv_grad @ self.a_per @ np.swapaxes(self.inv_grad, -1, -2))

    def flux(self, direction):
        """det grad phi (grad phi)^{-1} A_per p for a constant vector p."""
        return self.det[..., None] * np.einsum('eqij,eqjk,k->eqi', self.inv_grad, self.a_per,
                                               np.asarray(direction, dtype=float))


def sample_coefficients(mesh, diffeo, a_per):
    """Evaluate the factors of the corrector equation at the mesh quadrature points.

    Parameters
    ----------
    mesh : PeriodicMesh
    diffeo : TensorDiffeoField
        Realized (or lazily extended) over [0, N] on every axis.
    a_per : PeriodicMatrixField

    Returns
    -------
    CoefficientSample

    Raises
    ------
    ValueError
        On a dimension mismatch or when A_per is not coercive at some point.
    """
    if diffeo.dim != mesh.dim or a_per.dim != mesh.dim:
        raise ValueError(f"dimensions differ: mesh {mesh.dim}, diffeomorphism {diffeo.dim}, "
                         f"coefficient {a_per.dim}")
    diffeo.ensure_range(0, mesh.n_cells)
    pts = mesh.quad_points
    diag = diffeo.gradient(pts)
    eye = np.eye(mesh.dim)
    grad = diag[..., None] * eye
    inv_grad = (1.0 / diag)[..., None] * eye
    if np.max(np.abs(inv_grad @ grad - eye)) > INVERSE_TOL:
        raise RuntimeError("inverse of grad phi is inaccurate")
    det = np.prod(diag, axis=-1)
    values = np.asarray(a_per(pts), dtype=float)
    sym = 0.5 * (values + np.swapaxes(values, -1, -2))
    lowest = float(np.min(np.linalg.eigvalsh(sym)))
    if lowest <= 0:
        raise ValueError(f"A_per is not coercive at a quadrature point, smallest eigenvalue "
                         f"of its symmetric part is {lowest}")
    LOGGER.debug("Coefficients at %d points, det grad phi in [%.4g, %.4g].",
                 det.size, det.min(), det.max())
    return CoefficientSample(grad=grad, inv_grad=inv_grad, det=det, a_per=values)
